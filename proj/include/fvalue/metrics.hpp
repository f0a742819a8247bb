#pragma once

#include "fvalue/types.hpp"

#include <span>

namespace fvalue {

/// e(t, h) = actual(t, h) - forecast(t, h). Any number of hours per day (H = columns).
struct ErrorPanel {
    Panel errors;

    static ErrorPanel from(const Panel& actual, const Panel& forecast);
    Eigen::Index days() const { return errors.rows(); }
    Eigen::Index hours() const { return errors.cols(); }
};

double rmse(const ErrorPanel& e);
double mae(const ErrorPanel& e);

struct CovEResult {
    double value = 0.0;     // -inf when the moment matrix is not positive definite
    bool singular = false;
};

/// Log-determinant of (1/T) sum_t e_t' e_t (uncentred unless `centered`), via Cholesky.
CovEResult cov_e(const ErrorPanel& e, bool centered = false);

struct SpearmanResult {
    double value = 0.0;
    bool degenerate = false;  // zero rank variance on either side; value is 0
};

/// Average ranks for ties (1-based).
Eigen::VectorXd average_ranks(std::span<const double> x);
SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

struct CorrFResult {
    double value = 0.0;
    int degenerate_days = 0;
};

/// Mean over days of the Spearman correlation between actual and forecast curves.
CorrFResult corr_f(const Panel& actual, const Panel& forecast);

/// Earliest hour index (0-based) of the minimum / maximum.
Eigen::Index argmin_hour(const Eigen::Ref<const Eigen::RowVectorXd>& row);
Eigen::Index argmax_hour(const Eigen::Ref<const Eigen::RowVectorXd>& row);

/// Mean over days of |h_min - hhat_min| + |h_max - hhat_max| (linear hour distance).
double mhd(const Panel& actual, const Panel& forecast);
/// Mean over days of the actual-price gap between true and forecast-chosen extreme hours.
double mpd(const Panel& actual, const Panel& forecast);

struct MetricReport {
    double rmse = 0.0;
    double mae = 0.0;
    double cov_e = 0.0;
    double corr_f = 0.0;
    double mhd = 0.0;
    double mpd = 0.0;
    bool cov_e_singular = false;
    int degenerate_days = 0;  // Spearman days with zero rank variance
};

struct MetricOptions {
    bool centered_covariance = false;
};

MetricReport evaluate_metrics(const Panel& actual, const Panel& forecast,
                              const MetricOptions& opts = {});

}  // namespace fvalue
