#pragma once

#include "fvalue/linear.hpp"

#include <cstdint>
#include <vector>

namespace fvalue {

inline constexpr int kHiddenUnits = 5;

/// Single-hidden-layer tanh network with a linear output unit. Inputs and target are
/// min-max scaled to [-1, 1] using ranges from the calibration sample.
struct NarxNet {
    Eigen::Matrix<double, kHiddenUnits, Eigen::Dynamic> input_weights;
    Eigen::Matrix<double, kHiddenUnits, 1> hidden_bias = Eigen::Matrix<double, kHiddenUnits, 1>::Zero();
    Eigen::Matrix<double, kHiddenUnits, 1> output_weights =
        Eigen::Matrix<double, kHiddenUnits, 1>::Zero();
    double output_bias = 0.0;

    Vector input_offset;  // scaled = (x - offset) * gain
    Vector input_gain;
    double target_offset = 0.0;  // y = scaled / gain + offset
    double target_gain = 1.0;

    /// Zero weights and identity scaling for `inputs` regressors.
    static NarxNet zeros(int inputs);

    int inputs() const { return static_cast<int>(input_weights.cols()); }
    static Eigen::Index parameter_count(int inputs) { return kHiddenUnits * (inputs + 2) + 1; }

    /// Layout: input weights row by row (hidden unit major), hidden biases, output weights,
    /// output bias.
    Vector pack() const;
    void unpack(const Vector& theta);

    double predict_scaled(const Eigen::Ref<const Vector>& xs) const;
    double predict(const Eigen::Ref<const Vector>& x) const;

    Matrix scale_inputs(const Matrix& X) const;
};

/// d output / d parameters for each row of the scaled design, in pack() order.
Matrix narx_jacobian(const NarxNet& net, const Matrix& scaled_inputs);

struct LmSettings {
    double initial_damping = 1e-3;
    double damping_increase = 10.0;
    double damping_decrease = 10.0;
    double max_damping = 1e10;
    int max_epochs = 1000;
    int patience = 6;            // validation checks without improvement
    double holdout_fraction = 0.1;
    int committee_size = 10;
};

struct NarxTrainingReport {
    int epochs = 0;
    double best_validation_sse = 0.0;
    enum class Stop { MaxEpochs, DampingOverflow, EarlyStopping } stop = Stop::MaxEpochs;
};

/// Levenberg-Marquardt fit of one net from a seeded initialisation with a seeded holdout.
NarxNet narx_train_single(const Matrix& X, const Vector& y, std::uint64_t seed,
                          const LmSettings& settings = {}, NarxTrainingReport* report = nullptr);

struct NarxCommittee {
    std::vector<NarxNet> members;

    double predict_one(const Eigen::Ref<const Vector>& x) const;
    Vector predict(const Matrix& X) const;
};

/// settings.committee_size independently seeded nets.
NarxCommittee narx_train(const Matrix& X, const Vector& y, std::uint64_t seed,
                         const LmSettings& settings = {});

}  // namespace fvalue
