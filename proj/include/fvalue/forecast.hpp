#pragma once

#include "fvalue/ingest.hpp"
#include "fvalue/linear.hpp"
#include "fvalue/narx.hpp"
#include "fvalue/transform.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fvalue {

inline const std::vector<int> kDefaultWindows{56, 84, 112, 182, 365, 730, 1460};

/// Estimator settings shared by every pool member.
struct ModelSettings {
    FrameOptions frames;
    VstOptions vst;
    LassoSettings lasso;
    int lambda_count = 100;
    double lambda_ratio = 1e-4;
    LmSettings lm;
    std::uint64_t seed = 42;
};

/// Rolling-window day-ahead forecast for `target_day`; the model is re-estimated on the
/// `spec.window` days ending the day before. Prices dated on or after the target day and
/// commodities newer than two days are never read.
std::array<double, kHours> forecast_day(const ForecastSpec& spec, const MarketDataset& ds,
                                        Date target_day, const ModelSettings& settings = {});

/// Per-cell arithmetic mean over members sharing a base spec; independent of member order.
ForecastMatrix average_forecasts(std::span<const ForecastMatrix> members);

/// Cartesian selection of pool axes.
struct PoolConfig {
    std::vector<Family> families{Family::ARX, Family::NARX, Family::LEAR};
    std::vector<DepVar> depvars{DepVar::Direct, DepVar::Deviation};
    std::vector<bool> vst{false, true};
    std::vector<Estimator> estimators{Estimator::Heterogeneous, Estimator::Pooled};
    std::vector<int> windows = kDefaultWindows;
    bool include_averages = true;
    /// When non-empty, replaces the cartesian product of the four spec axes.
    std::vector<ForecastSpec> base_specs;

    std::vector<ForecastSpec> bases() const;
    /// Members in output order: for each base spec, its windows followed by the average.
    std::vector<ForecastSpec> members() const;
    int max_window() const;
};

/// Forecasts every pool member over [first, last]. threads == 0 uses the hardware count.
std::vector<ForecastMatrix> run_pool(const MarketDataset& ds, Date first, Date last,
                                     const PoolConfig& pool, const ModelSettings& settings = {},
                                     unsigned threads = 0);

/// Runs fn(0..count-1) on a small worker pool; rethrows the first exception.
void parallel_for(size_t count, unsigned threads, const std::function<void(size_t)>& fn);

}  // namespace fvalue
