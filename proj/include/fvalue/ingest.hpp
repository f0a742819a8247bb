#pragma once

#include "fvalue/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fvalue {

inline constexpr int kCommodities = 4;  // gas, oil, coal, EUA

using CommodityPanel = Eigen::Matrix<double, Eigen::Dynamic, kCommodities, Eigen::RowMajor>;

/// Aligned day x hour market panels. Immutable once built; safe to share across threads.
struct MarketDataset {
    std::vector<Date> dates;
    Panel prices;    // EUR/MWh
    Panel load_fc;   // MW, day-ahead TSO forecast
    Panel res_fc;    // MW, solar + wind day-ahead forecast
    CommodityPanel commodities;  // daily close, forward-filled
    std::vector<int> weekday;    // 0 = Monday

    size_t days() const { return dates.size(); }
    /// Index of `d`; throws ValidationError when absent.
    size_t index_of(Date d) const;
    MarketDataset slice(size_t first, size_t count) const;
    /// Checks shapes, finiteness, date continuity and weekday consistency.
    void validate() const;
};

/// Column names of the two input files. Defaults are the canonical headers.
struct CsvSchema {
    std::string timestamp = "timestamp";
    std::string price = "price";
    std::string load = "load_fc";
    std::string res = "res_fc";
    std::string date = "date";
    std::string gas = "gas";
    std::string oil = "oil";
    std::string coal = "coal";
    std::string eua = "eua";
};

/// Loads the hourly and daily files, repairs DST transitions, drops partial edge days
/// and forward-fills commodities. Errors name the first offending timestamp.
MarketDataset load_csv(const std::filesystem::path& hourly, const std::filesystem::path& daily,
                       const CsvSchema& schema = {});

/// Parsed ISO-8601 timestamp with explicit zone offset.
struct LocalTimestamp {
    Date local_day;
    int local_hour = 0;       // 0..23 wall clock
    std::int64_t utc_seconds = 0;
};

LocalTimestamp parse_timestamp(std::string_view text);

/// One raw observation keyed by local wall-clock day and hour.
struct LocalHourValue {
    Date day;
    int hour = 0;  // 0..23
    double value = 0.0;
};

struct DailyValues {
    Date day;
    std::array<double, kHours> values{};
};

/// Repairs DST anomalies in a chronologically ordered series: a missing spring hour becomes
/// the mean of its neighbours, a duplicated autumn hour becomes the mean of the pair.
/// More than one anomaly within a day is an error.
std::vector<DailyValues> fix_dst(std::span<const LocalHourValue> raw);

enum class SynthProfile { Duck, Flat, Spiky };

SynthProfile parse_profile(std::string_view s);
std::string to_string(SynthProfile p);

/// Noise-free intraday price shape of the duck profile, hours 1..24 at index 0..23.
std::array<double, kHours> duck_base_curve();

/// Deterministic synthetic market. Requires days >= 15.
MarketDataset synth_market(std::uint64_t seed, int days, SynthProfile profile,
                           Date start = Date{std::chrono::year{2021} / 1 / 1});

/// Writes `ds` in the CSV input contract (hourly file with +01:00 offsets, daily file).
void write_market_csv(const MarketDataset& ds, const std::filesystem::path& hourly,
                      const std::filesystem::path& daily);

// ---------------------------------------------------------------------------
// Regressor frames

/// Regressors for one (target day, hour). hour == 0 marks a daily-mean frame.
struct RegressorFrame {
    Date target_day;
    int hour = 0;
    std::vector<double> deterministic;
    std::vector<double> ar_terms;
    std::vector<double> x1;
    std::vector<double> x2;
    std::vector<double> augmentation;  // pooled LEAR only

    size_t size() const {
        return deterministic.size() + ar_terms.size() + x1.size() + x2.size() + augmentation.size();
    }
    /// Concatenation in declaration order.
    void flatten_into(double* out) const;
};

struct FrameOptions {
    /// LEAR keeps the 9-entry common daily vector.
    bool lear_keep_x1 = true;
};

/// Panels a frame reads from. `target` holds the dependent variable (prices, deviations or
/// a single daily-mean column); `level` holds the price level used for the daily summary.
struct FrameSource {
    const Panel* target = nullptr;
    const Panel* level = nullptr;
    const Panel* load = nullptr;
    const Panel* res = nullptr;
    const CommodityPanel* commodities = nullptr;
    const std::vector<int>* weekday = nullptr;
    const std::vector<Date>* dates = nullptr;
};

inline constexpr size_t kMaxLagDays = 7;

/// Regressor count of an hourly frame.
size_t frame_width(Family family, Estimator estimator, const FrameOptions& opts = {});
/// Regressor count of a daily-mean frame.
size_t daily_frame_width(Family family);

RegressorFrame make_frame(const FrameSource& src, Family family, Estimator estimator, size_t t,
                          int hour, const FrameOptions& opts = {});
RegressorFrame make_daily_frame(const FrameSource& src, Family family, size_t t);

/// One frame per (target day, hour) for every day with full lag history.
std::vector<RegressorFrame> build_frames(const MarketDataset& ds, Family family, DepVar depvar,
                                         Estimator estimator, const FrameOptions& opts = {});

}  // namespace fvalue
