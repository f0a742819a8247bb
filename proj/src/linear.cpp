#include "fvalue/linear.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <limits>

namespace fvalue {

double LinearFit::predict(const Eigen::Ref<const Vector>& x) const {
    return (has_intercept ? intercept : 0.0) + x.dot(coefficients);
}

Vector LinearFit::predict(const Matrix& X) const {
    Vector out = X * coefficients;
    if (has_intercept) out.array() += intercept;
    return out;
}

namespace {

void require_finite(const Matrix& X, const Vector& y, const char* who) {
    if (X.rows() != y.size())
        throw ValidationError(std::string(who) + ": design has " + std::to_string(X.rows()) +
                              " rows but response has " + std::to_string(y.size()));
    if (!X.allFinite() || !y.allFinite())
        throw ValidationError(std::string(who) + ": non-finite input");
}

double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

}  // namespace

LinearFit ols_fit(const Matrix& X, const Vector& y) {
    require_finite(X, y, "ols_fit");
    if (X.rows() < X.cols())
        throw ValidationError("ols_fit: " + std::to_string(X.rows()) + " rows for " +
                              std::to_string(X.cols()) + " columns");
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(X);
    LinearFit fit;
    fit.coefficients = cod.solve(y);
    if (cod.rank() < X.cols()) {
        fit.rank_deficient = true;
        spdlog::warn("ols_fit: design rank {} < {} columns; minimum-norm solution", cod.rank(),
                     X.cols());
    }
    fit.residual_variance = (y - X * fit.coefficients).squaredNorm() / static_cast<double>(X.rows());
    return fit;
}

StandardizedProblem StandardizedProblem::make(const Matrix& X, const Vector& y) {
    require_finite(X, y, "lasso_fit");
    if (X.rows() < 2) throw ValidationError("lasso_fit: need at least two rows");
    const double n = static_cast<double>(X.rows());
    StandardizedProblem p;
    p.mean = X.colwise().mean().transpose();
    p.Z = X.rowwise() - p.mean.transpose();
    p.scale.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double sd = std::sqrt(p.Z.col(j).squaredNorm() / n);
        // Relative threshold: a column that is constant up to rounding carries no signal.
        const double tiny = 1e-12 * std::max(1.0, std::abs(p.mean(j)));
        if (sd > tiny) {
            p.scale(j) = sd;
            p.Z.col(j) /= sd;
        } else {
            p.scale(j) = 0.0;
            p.Z.col(j).setZero();
        }
    }
    p.y_mean = y.mean();
    p.yc = y.array() - p.y_mean;
    return p;
}

double StandardizedProblem::lambda_max() const {
    const double n = static_cast<double>(Z.rows());
    double lmax = 0.0;
    for (Eigen::Index j = 0; j < Z.cols(); ++j)
        lmax = std::max(lmax, std::abs(Z.col(j).dot(yc) / n));
    return lmax;
}

namespace {

// Coordinate descent state for one standardised problem.
class CoordinateSolver {
public:
    explicit CoordinateSolver(const StandardizedProblem& prob)
        : prob_(prob), n_(static_cast<double>(prob.Z.rows())), diag_(prob.Z.cols()),
          beta_(Vector::Zero(prob.Z.cols())), r_(prob.yc) {
        for (Eigen::Index j = 0; j < diag_.size(); ++j) diag_(j) = prob.Z.col(j).squaredNorm() / n_;
    }

    void reset(const Vector& beta) {
        beta_ = beta;
        r_ = prob_.yc - prob_.Z * beta_;
    }

    // Sweeps until the largest per-coordinate change satisfies the criterion. With
    // `absolute`, the change is |delta beta_j|; otherwise diag_j * delta^2 (objective scale).
    int solve(double lambda, double tolerance, bool absolute, int max_sweeps) {
        auto update = [&](Eigen::Index j) {
            if (diag_(j) == 0.0) return 0.0;
            const double g = prob_.Z.col(j).dot(r_) / n_ + diag_(j) * beta_(j);
            const double next = soft_threshold(g, lambda) / diag_(j);
            const double delta = next - beta_(j);
            if (delta != 0.0) {
                r_.noalias() -= delta * prob_.Z.col(j);
                beta_(j) = next;
            }
            return absolute ? std::abs(delta) : diag_(j) * delta * delta;
        };
        int sweeps = 0;
        while (sweeps < max_sweeps) {
            double change = 0.0;
            for (Eigen::Index j = 0; j < beta_.size(); ++j) change = std::max(change, update(j));
            ++sweeps;
            if (change < tolerance) break;
            // Iterate on the active set until it settles, then re-check every coordinate.
            while (sweeps < max_sweeps) {
                double active_change = 0.0;
                for (Eigen::Index j = 0; j < beta_.size(); ++j)
                    if (beta_(j) != 0.0) active_change = std::max(active_change, update(j));
                ++sweeps;
                if (active_change < tolerance) break;
            }
        }
        return sweeps;
    }

    LassoPathPoint point(double lambda, int sweeps) const {
        LassoPathPoint p;
        p.lambda = lambda;
        p.beta = beta_;
        p.rss = r_.squaredNorm();
        p.nonzero = static_cast<int>((beta_.array() != 0.0).count());
        p.sweeps = sweeps;
        return p;
    }

private:
    const StandardizedProblem& prob_;
    double n_;
    Vector diag_;
    Vector beta_;
    Vector r_;
};

}  // namespace

std::vector<LassoPathPoint> lasso_path(const StandardizedProblem& prob,
                                       const std::vector<double>& lambda_grid,
                                       const LassoSettings& settings) {
    if (lambda_grid.empty()) throw ValidationError("lasso_fit: empty lambda grid");
    const double n = static_cast<double>(prob.Z.rows());
    const double tss = prob.yc.squaredNorm();
    const double threshold = settings.path_tolerance * std::max(tss / n, std::numeric_limits<double>::min());
    CoordinateSolver solver(prob);
    std::vector<LassoPathPoint> path;
    for (double lambda : lambda_grid) {
        if (!(lambda >= 0.0)) throw ValidationError("lasso_fit: negative lambda");
        const int sweeps = solver.solve(lambda, threshold, false, settings.max_sweeps);
        const LassoPathPoint point = solver.point(lambda, sweeps);
        if (!path.empty() && point.nonzero + 1 > settings.max_df_fraction * n) break;
        path.push_back(point);
        const bool saturated = point.nonzero + 1 >= prob.Z.rows();
        const bool explained = tss > 0.0 && 1.0 - point.rss / tss >= settings.max_deviance_ratio;
        if (saturated || explained) break;
    }
    return path;
}

std::vector<double> log_lambda_grid(double lambda_max, int count, double ratio) {
    std::vector<double> grid;
    if (count <= 0) return grid;
    if (count == 1 || lambda_max <= 0.0) {
        grid.push_back(std::max(lambda_max, 0.0));
        return grid;
    }
    const double step = std::log(ratio) / (count - 1);
    for (int k = 0; k < count; ++k) grid.push_back(lambda_max * std::exp(step * k));
    grid.front() = lambda_max;
    return grid;
}

namespace {

LinearFit fit_from_problem(const StandardizedProblem& prob, const std::vector<double>& lambda_grid,
                           const LassoSettings& settings) {
    const auto path = lasso_path(prob, lambda_grid, settings);
    const double n = static_cast<double>(prob.Z.rows());

    size_t best = 0;
    double best_bic = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < path.size(); ++k) {
        const double rss = std::max(path[k].rss, std::numeric_limits<double>::min());
        const double bic = n * std::log(rss / n) + (path[k].nonzero + 1) * std::log(n);
        if (bic < best_bic) {
            best_bic = bic;
            best = k;
        }
    }

    // Polish the selected point to the absolute coefficient tolerance.
    CoordinateSolver solver(prob);
    solver.reset(path[best].beta);
    const double lambda = path[best].lambda;
    const auto point = solver.point(lambda, solver.solve(lambda, settings.tolerance, true, settings.max_sweeps));
    LinearFit fit;
    fit.has_intercept = true;
    fit.lambda = point.lambda;
    fit.coefficients = Vector::Zero(prob.Z.cols());
    for (Eigen::Index j = 0; j < prob.Z.cols(); ++j)
        if (prob.scale(j) > 0.0) fit.coefficients(j) = point.beta(j) / prob.scale(j);
    fit.intercept = prob.y_mean - prob.mean.dot(fit.coefficients);
    fit.residual_variance = point.rss / n;
    return fit;
}

}  // namespace

LinearFit lasso_fit(const Matrix& X, const Vector& y, const std::vector<double>& lambda_grid,
                    const LassoSettings& settings) {
    return fit_from_problem(StandardizedProblem::make(X, y), lambda_grid, settings);
}

LinearFit lasso_fit_auto(const Matrix& X, const Vector& y, const LassoSettings& settings) {
    const StandardizedProblem prob = StandardizedProblem::make(X, y);
    return fit_from_problem(prob, log_lambda_grid(prob.lambda_max()), settings);
}

}  // namespace fvalue
