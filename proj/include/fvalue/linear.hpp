#pragma once

#include "fvalue/types.hpp"

#include <vector>

namespace fvalue {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Estimated linear model: yhat = intercept + X * coefficients.
struct LinearFit {
    Vector coefficients;     // one per design column, original scale
    double intercept = 0.0;  // used only when has_intercept
    bool has_intercept = false;
    double residual_variance = 0.0;  // RSS / n
    double lambda = 0.0;             // selected penalty (LASSO only)
    bool rank_deficient = false;     // OLS fell back to the minimum-norm solution

    double predict(const Eigen::Ref<const Vector>& x) const;
    Vector predict(const Matrix& X) const;
};

/// Least squares via complete orthogonal decomposition. No implicit intercept.
LinearFit ols_fit(const Matrix& X, const Vector& y);

struct LassoSettings {
    double tolerance = 1e-7;          // selected fit: max absolute coefficient change per sweep
    /// Path points: max weighted objective change per sweep, relative to the null deviance.
    double path_tolerance = 1e-7;
    int max_sweeps = 10000;           // per lambda
    double max_deviance_ratio = 0.999;  // stop the path once R^2 reaches this
    double max_df_fraction = 0.5;     // drop path points with nonzero + 1 > fraction * n
};

/// One point of a LASSO path on the standardised scale.
struct LassoPathPoint {
    double lambda = 0.0;
    Vector beta;  // standardised scale
    double rss = 0.0;
    int nonzero = 0;
    int sweeps = 0;
};

/// Column standardisation and centred response shared by the path and the fit.
struct StandardizedProblem {
    Matrix Z;             // standardised columns; zero-variance columns left at zero
    Vector yc;            // centred response
    Vector mean;          // column means
    Vector scale;         // column population std devs (0 for constant columns)
    double y_mean = 0.0;

    static StandardizedProblem make(const Matrix& X, const Vector& y);
    /// max_j |z_j' y_c| / n: the smallest penalty that zeroes every coefficient.
    double lambda_max() const;
};

/// Cyclic coordinate descent with warm starts along a descending grid.
std::vector<LassoPathPoint> lasso_path(const StandardizedProblem& prob,
                                       const std::vector<double>& lambda_grid,
                                       const LassoSettings& settings = {});

/// `count` log-spaced values from lambda_max down to ratio * lambda_max.
std::vector<double> log_lambda_grid(double lambda_max, int count = 100, double ratio = 1e-4);

/// Penalised fit with unpenalised intercept; selects the grid point with the lowest in-sample
/// BIC = n ln(RSS/n) + df ln(n). Coefficients are reported on the original scale.
LinearFit lasso_fit(const Matrix& X, const Vector& y, const std::vector<double>& lambda_grid,
                    const LassoSettings& settings = {});

/// lasso_fit over the default 100-point grid.
LinearFit lasso_fit_auto(const Matrix& X, const Vector& y, const LassoSettings& settings = {});

}  // namespace fvalue
