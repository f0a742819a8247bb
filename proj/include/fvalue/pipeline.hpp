#pragma once

#include "fvalue/config.hpp"

#include <filesystem>

namespace fvalue {

/// Output layout under RunConfig::out.
struct OutputPaths {
    std::filesystem::path root;

    std::filesystem::path hourly() const { return root / "data" / "prices.csv"; }
    std::filesystem::path daily() const { return root / "data" / "commodities.csv"; }
    std::filesystem::path forecasts() const { return root / "forecasts"; }
    std::filesystem::path forecast(const std::string& member_id) const {
        return forecasts() / (member_id + ".csv");
    }
    std::filesystem::path manifest() const { return root / "pool_manifest.json"; }
    std::filesystem::path profits(const std::string& bess) const {
        return root / ("profits_" + bess + ".csv");
    }
    std::filesystem::path metrics() const { return root / "metrics.csv"; }
    std::filesystem::path correlation_table() const { return root / "correlation_table.csv"; }
    std::filesystem::path rolling_correlation() const { return root / "rolling_correlation.csv"; }
    std::filesystem::path yearly_stats() const { return root / "yearly_stats.csv"; }
};

inline const std::string kOracleId = "oracle";

/// Writes the synthetic dataset (no-op for a csv data source).
void cmd_synth(const RunConfig& cfg);
/// Forecasts every pool member; writes one file per member and the manifest.
void cmd_forecast(const RunConfig& cfg);
/// Profits per BESS spec, oracle included.
void cmd_backtest(const RunConfig& cfg);
/// Metric report per member.
void cmd_evaluate(const RunConfig& cfg);
/// Correlation table, rolling series and yearly statistics.
void cmd_correlate(const RunConfig& cfg);
void cmd_all(const RunConfig& cfg);

}  // namespace fvalue
