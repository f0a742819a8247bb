#include "fvalue/narx.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace fvalue {

NarxNet NarxNet::zeros(int inputs) {
    NarxNet net;
    net.input_weights = Eigen::Matrix<double, kHiddenUnits, Eigen::Dynamic>::Zero(kHiddenUnits, inputs);
    net.input_offset = Vector::Zero(inputs);
    net.input_gain = Vector::Ones(inputs);
    return net;
}

Vector NarxNet::pack() const {
    const int n = inputs();
    Vector theta(parameter_count(n));
    Eigen::Index k = 0;
    for (int h = 0; h < kHiddenUnits; ++h)
        for (int i = 0; i < n; ++i) theta(k++) = input_weights(h, i);
    for (int h = 0; h < kHiddenUnits; ++h) theta(k++) = hidden_bias(h);
    for (int h = 0; h < kHiddenUnits; ++h) theta(k++) = output_weights(h);
    theta(k) = output_bias;
    return theta;
}

void NarxNet::unpack(const Vector& theta) {
    const int n = inputs();
    if (theta.size() != parameter_count(n)) throw ValidationError("NarxNet::unpack: size mismatch");
    Eigen::Index k = 0;
    for (int h = 0; h < kHiddenUnits; ++h)
        for (int i = 0; i < n; ++i) input_weights(h, i) = theta(k++);
    for (int h = 0; h < kHiddenUnits; ++h) hidden_bias(h) = theta(k++);
    for (int h = 0; h < kHiddenUnits; ++h) output_weights(h) = theta(k++);
    output_bias = theta(k);
}

double NarxNet::predict_scaled(const Eigen::Ref<const Vector>& xs) const {
    const Eigen::Matrix<double, kHiddenUnits, 1> a = input_weights * xs + hidden_bias;
    return output_bias + output_weights.dot(a.array().tanh().matrix());
}

double NarxNet::predict(const Eigen::Ref<const Vector>& x) const {
    const Vector xs = (x - input_offset).cwiseProduct(input_gain);
    return predict_scaled(xs) / target_gain + target_offset;
}

Matrix NarxNet::scale_inputs(const Matrix& X) const {
    Matrix xs = X.rowwise() - input_offset.transpose();
    return xs * input_gain.asDiagonal();
}

Matrix narx_jacobian(const NarxNet& net, const Matrix& xs) {
    const int n = net.inputs();
    const Eigen::Index rows = xs.rows();
    Matrix J(rows, NarxNet::parameter_count(n));
    // Hidden activations for all rows: rows x 5.
    Matrix z = (xs * net.input_weights.transpose()).rowwise() + net.hidden_bias.transpose();
    z = z.array().tanh().matrix();
    for (int h = 0; h < kHiddenUnits; ++h) {
        const Vector dh = net.output_weights(h) * (1.0 - z.col(h).array().square()).matrix();
        for (int i = 0; i < n; ++i) J.col(h * n + i) = dh.cwiseProduct(xs.col(i));
        J.col(kHiddenUnits * n + h) = dh;
        J.col(kHiddenUnits * n + kHiddenUnits + h) = z.col(h);
    }
    J.col(J.cols() - 1).setOnes();
    return J;
}

namespace {

Vector forward(const NarxNet& net, const Matrix& xs) {
    Matrix z = (xs * net.input_weights.transpose()).rowwise() + net.hidden_bias.transpose();
    return (z.array().tanh().matrix() * net.output_weights).array() + net.output_bias;
}

// Maps [min, max] onto [-1, 1]; constant columns collapse to 0.
void fit_scaling(const Matrix& X, const Vector& y, NarxNet& net) {
    const Eigen::Index n = X.cols();
    net.input_offset.resize(n);
    net.input_gain.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double lo = X.col(j).minCoeff();
        const double hi = X.col(j).maxCoeff();
        net.input_offset(j) = 0.5 * (lo + hi);
        net.input_gain(j) = hi > lo ? 2.0 / (hi - lo) : 0.0;
    }
    const double lo = y.minCoeff();
    const double hi = y.maxCoeff();
    net.target_offset = 0.5 * (lo + hi);
    net.target_gain = hi > lo ? 2.0 / (hi - lo) : 1.0;
}

Matrix take_rows(const Matrix& m, const std::vector<Eigen::Index>& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(idx[r]);
    return out;
}

Vector take(const Vector& v, const std::vector<Eigen::Index>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (size_t r = 0; r < idx.size(); ++r) out(static_cast<Eigen::Index>(r)) = v(idx[r]);
    return out;
}

}  // namespace

NarxNet narx_train_single(const Matrix& X, const Vector& y, std::uint64_t seed,
                          const LmSettings& settings, NarxTrainingReport* report) {
    if (X.rows() != y.size()) throw ValidationError("narx_train: row mismatch");
    if (!X.allFinite() || !y.allFinite()) throw ValidationError("narx_train: non-finite input");
    const auto rows = X.rows();
    const auto holdout = static_cast<Eigen::Index>(
        std::lround(settings.holdout_fraction * static_cast<double>(rows)));
    if (holdout < 1 || rows - holdout < 1)
        throw ValidationError("narx_train: " + std::to_string(rows) +
                              " rows are too few for a validation holdout");

    std::mt19937_64 rng(seed);
    NarxNet net = NarxNet::zeros(static_cast<int>(X.cols()));
    fit_scaling(X, y, net);

    std::vector<Eigen::Index> order(static_cast<size_t>(rows));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Eigen::Index> val_idx(order.begin(), order.begin() + holdout);
    std::vector<Eigen::Index> train_idx(order.begin() + holdout, order.end());
    std::sort(val_idx.begin(), val_idx.end());
    std::sort(train_idx.begin(), train_idx.end());

    const Matrix xs_all = net.scale_inputs(X);
    const Vector ys_all = (y.array() - net.target_offset) * net.target_gain;
    const Matrix x_train = take_rows(xs_all, train_idx);
    const Vector y_train = take(ys_all, train_idx);
    const Matrix x_val = take_rows(xs_all, val_idx);
    const Vector y_val = take(ys_all, val_idx);

    std::uniform_real_distribution<double> init(-0.5, 0.5);
    Vector theta(NarxNet::parameter_count(net.inputs()));
    for (Eigen::Index k = 0; k < theta.size(); ++k) theta(k) = init(rng);
    net.unpack(theta);

    auto sse = [&](const Matrix& xs, const Vector& ys) { return (forward(net, xs) - ys).squaredNorm(); };

    double mu = settings.initial_damping;
    Vector best_theta = theta;
    double best_val = sse(x_val, y_val);
    int fails = 0;
    NarxTrainingReport rep;
    const Eigen::Index p = theta.size();
    Matrix H(p, p);

    int epoch = 0;
    for (; epoch < settings.max_epochs; ++epoch) {
        const Vector e = forward(net, x_train) - y_train;
        const double current = e.squaredNorm();
        const Matrix J = narx_jacobian(net, x_train);
        H.setZero();
        H.selfadjointView<Eigen::Lower>().rankUpdate(J.transpose());
        const Vector g = J.transpose() * e;

        bool accepted = false;
        while (!accepted) {
            Matrix A = H.selfadjointView<Eigen::Lower>();
            A.diagonal().array() += mu;
            const Vector step = A.llt().solve(-g);
            net.unpack(theta + step);
            const double trial = sse(x_train, y_train);
            if (step.allFinite() && trial < current) {
                theta += step;
                mu = std::max(mu / settings.damping_decrease, 1e-20);
                accepted = true;
            } else {
                net.unpack(theta);
                mu *= settings.damping_increase;
                if (mu > settings.max_damping) break;
            }
        }
        if (!accepted) {
            rep.stop = NarxTrainingReport::Stop::DampingOverflow;
            break;
        }

        const double val = sse(x_val, y_val);
        if (val < best_val) {
            best_val = val;
            best_theta = theta;
            fails = 0;
        } else if (++fails >= settings.patience) {
            rep.stop = NarxTrainingReport::Stop::EarlyStopping;
            ++epoch;
            break;
        }
    }
    rep.epochs = epoch;
    rep.best_validation_sse = best_val;
    if (report) *report = rep;
    net.unpack(best_theta);
    return net;
}

double NarxCommittee::predict_one(const Eigen::Ref<const Vector>& x) const {
    double sum = 0.0;
    for (const auto& m : members) sum += m.predict(x);
    return sum / static_cast<double>(members.size());
}

Vector NarxCommittee::predict(const Matrix& X) const {
    Vector out(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) out(r) = predict_one(Vector(X.row(r).transpose()));
    return out;
}

NarxCommittee narx_train(const Matrix& X, const Vector& y, std::uint64_t seed,
                         const LmSettings& settings) {
    if (settings.committee_size < 1) throw ValidationError("narx_train: committee size < 1");
    NarxCommittee committee;
    for (int k = 0; k < settings.committee_size; ++k)
        committee.members.push_back(
            narx_train_single(X, y, mix_seed(seed, static_cast<std::uint64_t>(k)), settings));
    return committee;
}

}  // namespace fvalue
