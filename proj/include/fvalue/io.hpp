#pragma once

#include "fvalue/bess.hpp"
#include "fvalue/metrics.hpp"
#include "fvalue/types.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fvalue {

/// `date,h1..h24` with one row per evaluation day.
void write_forecast_csv(const std::filesystem::path& path, const ForecastMatrix& fm);
ForecastMatrix read_forecast_csv(const std::filesystem::path& path, const ForecastSpec& spec);

struct MemberProfits {
    std::string member_id;
    std::vector<ProfitRecord> records;
};

/// `member_id,date,h_ch,h_dis,profit_abs,profit_per_mwh`, members in the given order.
void write_profits_csv(const std::filesystem::path& path, const std::vector<MemberProfits>& all);
std::vector<MemberProfits> read_profits_csv(const std::filesystem::path& path);

struct MemberMetrics {
    std::string member_id;
    MetricReport report;
};

/// `member_id,rmse,mae,cov_e,corr_f,mhd,mpd,degenerate_days`.
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MemberMetrics>& all);
std::vector<MemberMetrics> read_metrics_csv(const std::filesystem::path& path);

/// Git-style blob SHA-1 ("blob <size>\0" prefix), lowercase hex.
std::string blob_sha1(std::string_view content);
std::string file_sha1(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);

}  // namespace fvalue
