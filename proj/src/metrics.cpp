#include "fvalue/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace fvalue {

namespace {

void require_aligned(const Panel& a, const Panel& b, const char* who) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError(std::string(who) + ": panels are not aligned");
    if (a.rows() < 1) throw ValidationError(std::string(who) + ": empty panel");
}

}  // namespace

ErrorPanel ErrorPanel::from(const Panel& actual, const Panel& forecast) {
    require_aligned(actual, forecast, "ErrorPanel");
    return ErrorPanel{actual - forecast};
}

double rmse(const ErrorPanel& e) {
    return std::sqrt(e.errors.squaredNorm() / static_cast<double>(e.errors.size()));
}

double mae(const ErrorPanel& e) {
    return e.errors.cwiseAbs().sum() / static_cast<double>(e.errors.size());
}

CovEResult cov_e(const ErrorPanel& e, bool centered) {
    Eigen::MatrixXd E = e.errors;
    if (centered) E = E.rowwise() - E.colwise().mean();
    const Eigen::MatrixXd sigma = (E.transpose() * E) / static_cast<double>(E.rows());
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    CovEResult out;
    const double max_diag = sigma.diagonal().maxCoeff();
    bool ok = llt.info() == Eigen::Success && max_diag > 0.0;
    if (ok) {
        const Eigen::VectorXd pivots = llt.matrixL().toDenseMatrix().diagonal().array().square();
        ok = pivots.minCoeff() > 1e-12 * max_diag;
        if (ok) out.value = pivots.array().log().sum();
    }
    if (!ok) {
        out.value = -std::numeric_limits<double>::infinity();
        out.singular = true;
    }
    return out;
}

Eigen::VectorXd average_ranks(std::span<const double> x) {
    const size_t n = x.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
    Eigen::VectorXd ranks(static_cast<Eigen::Index>(n));
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (size_t k = i; k <= j; ++k) ranks(static_cast<Eigen::Index>(order[k])) = r;
        i = j + 1;
    }
    return ranks;
}

SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ValidationError("spearman: need two equal-length series of at least 2 values");
    const Eigen::VectorXd rx = average_ranks(x);
    const Eigen::VectorXd ry = average_ranks(y);
    const Eigen::VectorXd dx = rx.array() - rx.mean();
    const Eigen::VectorXd dy = ry.array() - ry.mean();
    const double sxx = dx.squaredNorm();
    const double syy = dy.squaredNorm();
    if (!(sxx > 0.0) || !(syy > 0.0)) return {0.0, true};
    const double r = dx.dot(dy) / std::sqrt(sxx * syy);
    return {std::clamp(r, -1.0, 1.0), false};
}

CorrFResult corr_f(const Panel& actual, const Panel& forecast) {
    require_aligned(actual, forecast, "corr_f");
    CorrFResult out;
    double sum = 0.0;
    for (Eigen::Index t = 0; t < actual.rows(); ++t) {
        const auto a = actual.row(t);
        const auto f = forecast.row(t);
        const auto s = spearman({a.data(), static_cast<size_t>(a.size())},
                                {f.data(), static_cast<size_t>(f.size())});
        sum += s.value;
        if (s.degenerate) ++out.degenerate_days;
    }
    out.value = sum / static_cast<double>(actual.rows());
    return out;
}

Eigen::Index argmin_hour(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    Eigen::Index best = 0;
    for (Eigen::Index h = 1; h < row.size(); ++h)
        if (row(h) < row(best)) best = h;
    return best;
}

Eigen::Index argmax_hour(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    Eigen::Index best = 0;
    for (Eigen::Index h = 1; h < row.size(); ++h)
        if (row(h) > row(best)) best = h;
    return best;
}

double mhd(const Panel& actual, const Panel& forecast) {
    require_aligned(actual, forecast, "mhd");
    double sum = 0.0;
    for (Eigen::Index t = 0; t < actual.rows(); ++t) {
        const Eigen::RowVectorXd a = actual.row(t);
        const Eigen::RowVectorXd f = forecast.row(t);
        sum += static_cast<double>(std::abs(argmin_hour(a) - argmin_hour(f)) +
                                   std::abs(argmax_hour(a) - argmax_hour(f)));
    }
    return sum / static_cast<double>(actual.rows());
}

double mpd(const Panel& actual, const Panel& forecast) {
    require_aligned(actual, forecast, "mpd");
    double sum = 0.0;
    for (Eigen::Index t = 0; t < actual.rows(); ++t) {
        const Eigen::RowVectorXd a = actual.row(t);
        const Eigen::RowVectorXd f = forecast.row(t);
        sum += std::abs(a(argmin_hour(a)) - a(argmin_hour(f))) +
               std::abs(a(argmax_hour(a)) - a(argmax_hour(f)));
    }
    return sum / static_cast<double>(actual.rows());
}

MetricReport evaluate_metrics(const Panel& actual, const Panel& forecast, const MetricOptions& opts) {
    const ErrorPanel e = ErrorPanel::from(actual, forecast);
    MetricReport r;
    r.rmse = rmse(e);
    r.mae = mae(e);
    const auto ce = cov_e(e, opts.centered_covariance);
    r.cov_e = ce.value;
    r.cov_e_singular = ce.singular;
    const auto cf = corr_f(actual, forecast);
    r.corr_f = cf.value;
    r.degenerate_days = cf.degenerate_days;
    r.mhd = mhd(actual, forecast);
    r.mpd = mpd(actual, forecast);
    return r;
}

}  // namespace fvalue
