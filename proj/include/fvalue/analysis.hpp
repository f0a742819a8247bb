#pragma once

#include "fvalue/bess.hpp"
#include "fvalue/metrics.hpp"
#include "fvalue/types.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace fvalue {

enum class Metric { RMSE, MAE, CovE, CorrF, MHD, MPD };
inline constexpr std::array<Metric, 6> kMetrics{Metric::RMSE, Metric::MAE, Metric::CovE,
                                                Metric::CorrF, Metric::MHD, Metric::MPD};
std::string to_string(Metric m);
double metric_value(const MetricReport& r, Metric m);

enum class PoolSubset { All, ARX, NARX, LEAR };
inline constexpr std::array<PoolSubset, 4> kSubsets{PoolSubset::ARX, PoolSubset::NARX,
                                                    PoolSubset::LEAR, PoolSubset::All};
std::string to_string(PoolSubset s);
bool in_subset(const ForecastSpec& spec, PoolSubset s);

struct PoolOutcome {
    std::string member_id;
    ForecastSpec spec;
    MetricReport metrics;
    double mean_profit = 0.0;  // mean profit_per_mwh over the period
};

struct Coefficient {
    double value = 0.0;
    bool degenerate = false;
};

using MetricCoefficients = std::array<Coefficient, kMetrics.size()>;

/// Spearman between each metric column and the mean-profit column over the subset.
/// Returns nullopt when the subset has fewer than 3 members.
std::optional<MetricCoefficients> pool_correlation(const std::vector<PoolOutcome>& outcomes,
                                                   PoolSubset subset);

/// Member inputs for the rolling analysis, all aligned on the same evaluation days.
struct MemberSeries {
    ForecastSpec spec;
    const Panel* forecast = nullptr;          // day x 24
    const std::vector<double>* profits = nullptr;  // profit_per_mwh per day
};

struct CorrelationSeries {
    int window = 0;
    int stride = 1;
    std::vector<Date> window_start;
    std::vector<MetricCoefficients> coefficients;

    /// Mean coefficient per metric over all window positions.
    std::array<double, kMetrics.size()> mean() const;
};

/// Windows start at 0, stride, 2*stride, ... while the window fits in the period.
/// Metrics are recomputed on each window's sub-panel.
CorrelationSeries rolling_correlation(const Panel& actual, std::span<const Date> dates,
                                      const std::vector<MemberSeries>& members, PoolSubset subset,
                                      int window, int stride = 1, const MetricOptions& opts = {},
                                      unsigned threads = 1);

struct YearlyRow {
    int year = 0;
    int days = 0;
    double oracle = 0.0;
    double max = 0.0;
    double min = 0.0;
    double mean = 0.0;
    double std = 0.0;  // population
};

/// Per calendar year: oracle mean daily profit and the distribution across members of
/// per-member mean daily profit (all per MWh).
std::vector<YearlyRow> yearly_stats(const std::vector<ProfitRecord>& oracle,
                                    const std::vector<std::vector<double>>& member_profits);

}  // namespace fvalue
