#include "fvalue/io.hpp"

#include "fvalue/csv.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

namespace fvalue {

namespace {

std::string context(const csv::Table& t, size_t row) {
    return t.source.string() + ":" + std::to_string(t.line_numbers[row]);
}

}  // namespace

void write_forecast_csv(const std::filesystem::path& path, const ForecastMatrix& fm) {
    if (fm.values.rows() != static_cast<Eigen::Index>(fm.dates.size()) || fm.values.cols() != kHours)
        throw ValidationError("forecast matrix for " + fm.spec.id() + " has the wrong shape");
    std::string out = "date";
    for (int h = 1; h <= kHours; ++h) out += ",h" + std::to_string(h);
    out += '\n';
    for (size_t t = 0; t < fm.dates.size(); ++t) {
        out += format_date(fm.dates[t]);
        for (int h = 0; h < kHours; ++h) {
            out += ',';
            out += csv::format_double(fm.values(static_cast<Eigen::Index>(t), h));
        }
        out += '\n';
    }
    csv::write_atomic(path, out);
}

ForecastMatrix read_forecast_csv(const std::filesystem::path& path, const ForecastSpec& spec) {
    const auto table = csv::read(path);
    const size_t date_col = table.column("date");
    std::array<size_t, kHours> cols{};
    for (int h = 0; h < kHours; ++h) cols[static_cast<size_t>(h)] = table.column("h" + std::to_string(h + 1));
    ForecastMatrix fm;
    fm.spec = spec;
    fm.values.resize(static_cast<Eigen::Index>(table.rows.size()), kHours);
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto ctx = context(table, r);
        try {
            fm.dates.push_back(parse_date(table.rows[r][date_col]));
        } catch (const ValidationError& e) {
            throw ValidationError(ctx + ": " + e.what());
        }
        for (int h = 0; h < kHours; ++h)
            fm.values(static_cast<Eigen::Index>(r), h) =
                csv::parse_double(table.rows[r][cols[static_cast<size_t>(h)]], ctx);
    }
    return fm;
}

void write_profits_csv(const std::filesystem::path& path, const std::vector<MemberProfits>& all) {
    std::string out = "member_id,date,h_ch,h_dis,profit_abs,profit_per_mwh\n";
    for (const auto& m : all)
        for (const auto& r : m.records) {
            out += m.member_id + ',' + format_date(r.date) + ',' + std::to_string(r.schedule.h_ch) + ',' +
                   std::to_string(r.schedule.h_dis) + ',' + csv::format_double(r.profit_abs) + ',' +
                   csv::format_double(r.profit_per_mwh) + '\n';
        }
    csv::write_atomic(path, out);
}

std::vector<MemberProfits> read_profits_csv(const std::filesystem::path& path) {
    const auto table = csv::read(path);
    const size_t c_id = table.column("member_id"), c_date = table.column("date"),
                 c_ch = table.column("h_ch"), c_dis = table.column("h_dis"),
                 c_abs = table.column("profit_abs"), c_rel = table.column("profit_per_mwh");
    std::vector<MemberProfits> out;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto ctx = context(table, r);
        if (out.empty() || out.back().member_id != row[c_id]) out.push_back({row[c_id], {}});
        ProfitRecord rec;
        try {
            rec.date = parse_date(row[c_date]);
        } catch (const ValidationError& e) {
            throw ValidationError(ctx + ": " + e.what());
        }
        rec.schedule.h_ch = static_cast<int>(csv::parse_long(row[c_ch], ctx));
        rec.schedule.h_dis = static_cast<int>(csv::parse_long(row[c_dis], ctx));
        rec.profit_abs = csv::parse_double(row[c_abs], ctx);
        rec.profit_per_mwh = csv::parse_double(row[c_rel], ctx);
        out.back().records.push_back(rec);
    }
    return out;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MemberMetrics>& all) {
    std::string out = "member_id,rmse,mae,cov_e,corr_f,mhd,mpd,degenerate_days\n";
    for (const auto& m : all) {
        const auto& r = m.report;
        out += m.member_id;
        for (double v : {r.rmse, r.mae, r.cov_e, r.corr_f, r.mhd, r.mpd}) out += ',' + csv::format_double(v);
        out += ',' + std::to_string(r.degenerate_days) + '\n';
    }
    csv::write_atomic(path, out);
}

std::vector<MemberMetrics> read_metrics_csv(const std::filesystem::path& path) {
    const auto table = csv::read(path);
    const size_t c_id = table.column("member_id");
    const std::array<size_t, 6> cols{table.column("rmse"),   table.column("mae"),
                                     table.column("cov_e"),  table.column("corr_f"),
                                     table.column("mhd"),    table.column("mpd")};
    const size_t c_deg = table.column("degenerate_days");
    std::vector<MemberMetrics> out;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto ctx = context(table, r);
        MemberMetrics m;
        m.member_id = row[c_id];
        m.report.rmse = csv::parse_double(row[cols[0]], ctx);
        m.report.mae = csv::parse_double(row[cols[1]], ctx);
        m.report.cov_e = csv::parse_double(row[cols[2]], ctx);
        m.report.cov_e_singular = std::isinf(m.report.cov_e);
        m.report.corr_f = csv::parse_double(row[cols[3]], ctx);
        m.report.mhd = csv::parse_double(row[cols[4]], ctx);
        m.report.mpd = csv::parse_double(row[cols[5]], ctx);
        m.report.degenerate_days = static_cast<int>(csv::parse_long(row[c_deg], ctx));
        out.push_back(std::move(m));
    }
    return out;
}

std::string blob_sha1(std::string_view content) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx) throw RuntimeError("cannot allocate digest context");
    const std::string prefix = "blob " + std::to_string(content.size()) + '\0';
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), prefix.data(), prefix.size()) != 1 ||
        EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
        throw RuntimeError("SHA-1 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string file_sha1(const std::filesystem::path& path) { return blob_sha1(read_text(path)); }

}  // namespace fvalue
