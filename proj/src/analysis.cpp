#include "fvalue/analysis.hpp"

#include "fvalue/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace fvalue {

std::string to_string(Metric m) {
    switch (m) {
        case Metric::RMSE: return "RMSE";
        case Metric::MAE: return "MAE";
        case Metric::CovE: return "Cov-e";
        case Metric::CorrF: return "Corr-f";
        case Metric::MHD: return "MHD";
        case Metric::MPD: return "MPD";
    }
    return "?";
}

double metric_value(const MetricReport& r, Metric m) {
    switch (m) {
        case Metric::RMSE: return r.rmse;
        case Metric::MAE: return r.mae;
        case Metric::CovE: return r.cov_e;
        case Metric::CorrF: return r.corr_f;
        case Metric::MHD: return r.mhd;
        case Metric::MPD: return r.mpd;
    }
    return 0.0;
}

std::string to_string(PoolSubset s) {
    switch (s) {
        case PoolSubset::All: return "all";
        case PoolSubset::ARX: return "ARX";
        case PoolSubset::NARX: return "NARX";
        case PoolSubset::LEAR: return "LEAR";
    }
    return "?";
}

bool in_subset(const ForecastSpec& spec, PoolSubset s) {
    switch (s) {
        case PoolSubset::All: return true;
        case PoolSubset::ARX: return spec.family == Family::ARX;
        case PoolSubset::NARX: return spec.family == Family::NARX;
        case PoolSubset::LEAR: return spec.family == Family::LEAR;
    }
    return false;
}

namespace {

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

Coefficient coefficient(const std::vector<double>& x, const std::vector<double>& y) {
    const auto s = spearman(x, y);
    return {s.value, s.degenerate};
}

MetricCoefficients correlate(const std::vector<MetricReport>& reports,
                             const std::vector<double>& profits) {
    MetricCoefficients out{};
    std::vector<double> column(reports.size());
    for (size_t m = 0; m < kMetrics.size(); ++m) {
        for (size_t i = 0; i < reports.size(); ++i) column[i] = metric_value(reports[i], kMetrics[m]);
        out[m] = coefficient(column, profits);
    }
    return out;
}

}  // namespace

std::optional<MetricCoefficients> pool_correlation(const std::vector<PoolOutcome>& outcomes,
                                                   PoolSubset subset) {
    std::vector<MetricReport> reports;
    std::vector<double> profits;
    for (const auto& o : outcomes)
        if (in_subset(o.spec, subset)) {
            reports.push_back(o.metrics);
            profits.push_back(o.mean_profit);
        }
    if (reports.size() < 3) return std::nullopt;
    return correlate(reports, profits);
}

std::array<double, kMetrics.size()> CorrelationSeries::mean() const {
    std::array<double, kMetrics.size()> out{};
    if (coefficients.empty()) return out;
    for (const auto& c : coefficients)
        for (size_t m = 0; m < out.size(); ++m) out[m] += c[m].value;
    for (double& v : out) v /= static_cast<double>(coefficients.size());
    return out;
}

CorrelationSeries rolling_correlation(const Panel& actual, std::span<const Date> dates,
                                      const std::vector<MemberSeries>& members, PoolSubset subset,
                                      int window, int stride, const MetricOptions& opts,
                                      unsigned threads) {
    const auto T = actual.rows();
    if (dates.size() != static_cast<size_t>(T))
        throw ValidationError("rolling_correlation: dates and prices are misaligned");
    if (window < 1 || window > T)
        throw ValidationError("rolling window of " + std::to_string(window) +
                              " days exceeds the evaluation period of " + std::to_string(T) + " days");
    if (stride < 1) throw ValidationError("rolling stride must be positive");

    std::vector<const MemberSeries*> chosen;
    for (const auto& m : members) {
        if (!m.forecast || !m.profits || m.forecast->rows() != T ||
            m.profits->size() != static_cast<size_t>(T))
            throw ValidationError("rolling_correlation: member " + m.spec.id() + " is misaligned");
        if (in_subset(m.spec, subset)) chosen.push_back(&m);
    }
    if (chosen.size() < 3)
        throw ValidationError("rolling_correlation: subset " + to_string(subset) +
                              " has fewer than 3 members");

    CorrelationSeries out;
    out.window = window;
    out.stride = stride;
    for (Eigen::Index s = 0; s + window <= T; s += stride) out.window_start.push_back(dates[static_cast<size_t>(s)]);
    out.coefficients.resize(out.window_start.size());

    parallel_for(out.window_start.size(), threads, [&](size_t k) {
        const Eigen::Index s = static_cast<Eigen::Index>(k) * stride;
        const Panel a = actual.middleRows(s, window);
        std::vector<MetricReport> reports;
        std::vector<double> profits;
        reports.reserve(chosen.size());
        for (const auto* m : chosen) {
            const Panel f = m->forecast->middleRows(s, window);
            reports.push_back(evaluate_metrics(a, f, opts));
            profits.push_back(mean_of(std::span<const double>(*m->profits).subspan(
                static_cast<size_t>(s), static_cast<size_t>(window))));
        }
        out.coefficients[k] = correlate(reports, profits);
    });
    return out;
}

std::vector<YearlyRow> yearly_stats(const std::vector<ProfitRecord>& oracle,
                                    const std::vector<std::vector<double>>& member_profits) {
    if (oracle.empty()) throw ValidationError("yearly_stats: empty profit record");
    if (member_profits.empty()) throw ValidationError("yearly_stats: empty pool");
    for (const auto& m : member_profits)
        if (m.size() != oracle.size())
            throw ValidationError("yearly_stats: member profits are misaligned with the oracle");

    std::map<int, std::vector<size_t>> by_year;
    for (size_t t = 0; t < oracle.size(); ++t)
        by_year[static_cast<int>(std::chrono::year_month_day(oracle[t].date).year())].push_back(t);

    std::vector<YearlyRow> rows;
    for (const auto& [year, idx] : by_year) {
        YearlyRow r;
        r.year = year;
        r.days = static_cast<int>(idx.size());
        double os = 0.0;
        for (size_t t : idx) os += oracle[t].profit_per_mwh;
        r.oracle = os / static_cast<double>(idx.size());

        std::vector<double> means;
        means.reserve(member_profits.size());
        for (const auto& m : member_profits) {
            double s = 0.0;
            for (size_t t : idx) s += m[t];
            means.push_back(s / static_cast<double>(idx.size()));
        }
        r.max = *std::max_element(means.begin(), means.end());
        r.min = *std::min_element(means.begin(), means.end());
        r.mean = mean_of(means);
        double ss = 0.0;
        for (double v : means) ss += (v - r.mean) * (v - r.mean);
        r.std = std::sqrt(ss / static_cast<double>(means.size()));
        r.mean = std::clamp(r.mean, r.min, r.max);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace fvalue
