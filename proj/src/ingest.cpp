#include "fvalue/ingest.hpp"

#include "fvalue/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace fvalue {

using namespace std::chrono;

size_t MarketDataset::index_of(Date d) const {
    if (dates.empty() || d < dates.front() || d > dates.back())
        throw ValidationError("date " + format_date(d) + " outside dataset range");
    return static_cast<size_t>((d - dates.front()).count());
}

MarketDataset MarketDataset::slice(size_t first, size_t count) const {
    if (first + count > days()) throw ValidationError("slice exceeds dataset");
    MarketDataset out;
    out.dates.assign(dates.begin() + first, dates.begin() + first + count);
    out.weekday.assign(weekday.begin() + first, weekday.begin() + first + count);
    const auto f = static_cast<Eigen::Index>(first);
    const auto n = static_cast<Eigen::Index>(count);
    out.prices = prices.middleRows(f, n);
    out.load_fc = load_fc.middleRows(f, n);
    out.res_fc = res_fc.middleRows(f, n);
    out.commodities = commodities.middleRows(f, n);
    return out;
}

void MarketDataset::validate() const {
    const auto n = static_cast<Eigen::Index>(days());
    auto check_panel = [&](const Panel& p, const char* name) {
        if (p.rows() != n || p.cols() != kHours)
            throw ValidationError(std::string(name) + " panel has wrong shape");
        if (!p.allFinite()) throw ValidationError(std::string(name) + " panel has missing cells");
    };
    check_panel(prices, "price");
    check_panel(load_fc, "load");
    check_panel(res_fc, "RES");
    if (commodities.rows() != n || !commodities.allFinite())
        throw ValidationError("commodity panel incomplete");
    if (weekday.size() != days()) throw ValidationError("weekday vector has wrong length");
    for (size_t i = 0; i < days(); ++i) {
        if (i > 0 && dates[i] - dates[i - 1] != std::chrono::days{1})
            throw ValidationError("dates not consecutive at " + format_date(dates[i]));
        if (weekday[i] != iso_weekday_index(dates[i]))
            throw ValidationError("weekday inconsistent at " + format_date(dates[i]));
    }
}

// ---------------------------------------------------------------------------

LocalTimestamp parse_timestamp(std::string_view text) {
    auto fail = [&]() -> LocalTimestamp {
        throw ValidationError("malformed timestamp '" + std::string(text) + "'");
    };
    auto num = [&](size_t pos, size_t len) {
        int v = 0;
        if (pos + len > text.size()) fail();
        const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
        if (ec != std::errc{} || ptr != text.data() + pos + len) fail();
        return v;
    };
    if (text.size() < 17 || (text[10] != 'T' && text[10] != ' ') || text[13] != ':') return fail();
    const Date day = parse_date(text.substr(0, 10));
    const int hour = num(11, 2);
    const int minute = num(14, 2);
    size_t pos = 16;
    int second = 0;
    if (pos < text.size() && text[pos] == ':') {
        second = num(pos + 1, 2);
        pos += 3;
    }
    if (hour > 23 || minute > 59 || second > 59) return fail();
    if (minute != 0 || second != 0)
        throw ValidationError("sub-hourly timestamp '" + std::string(text) + "'");
    int offset_seconds = 0;
    if (pos < text.size() && text[pos] == 'Z' && pos + 1 == text.size()) {
        offset_seconds = 0;
    } else if (pos + 6 == text.size() && (text[pos] == '+' || text[pos] == '-') &&
               text[pos + 3] == ':') {
        const int sign = text[pos] == '+' ? 1 : -1;
        offset_seconds = sign * (num(pos + 1, 2) * 3600 + num(pos + 4, 2) * 60);
    } else {
        return fail();
    }
    LocalTimestamp ts;
    ts.local_day = day;
    ts.local_hour = hour;
    const auto local_seconds =
        static_cast<std::int64_t>(day.time_since_epoch().count()) * 86400 + hour * 3600;
    ts.utc_seconds = local_seconds - offset_seconds;
    return ts;
}

std::vector<DailyValues> fix_dst(std::span<const LocalHourValue> raw) {
    std::vector<DailyValues> out;
    size_t i = 0;
    while (i < raw.size()) {
        const Date day = raw[i].day;
        size_t j = i;
        while (j < raw.size() && raw[j].day == day) ++j;

        std::array<int, kHours> count{};
        std::array<double, kHours> sum{};
        for (size_t k = i; k < j; ++k) {
            const int h = raw[k].hour;
            if (h < 0 || h >= kHours)
                throw ValidationError("hour out of range on " + format_date(day));
            ++count[static_cast<size_t>(h)];
            sum[static_cast<size_t>(h)] += raw[k].value;
        }
        int anomalies = 0;
        int missing_hour = -1;
        for (int h = 0; h < kHours; ++h) {
            const int c = count[static_cast<size_t>(h)];
            if (c == 0) {
                ++anomalies;
                missing_hour = h;
            } else {
                anomalies += c - 1;
            }
        }
        if (anomalies > 1)
            throw ValidationError("more than one DST anomaly on " + format_date(day));

        DailyValues dv;
        dv.day = day;
        for (size_t h = 0; h < kHours; ++h)
            if (count[h] > 0) dv.values[h] = sum[h] / count[h];

        if (missing_hour >= 0) {
            const auto m = static_cast<size_t>(missing_hour);
            std::vector<double> neighbours;
            if (m > 0)
                neighbours.push_back(dv.values[m - 1]);
            else if (!out.empty())
                neighbours.push_back(out.back().values[kHours - 1]);
            if (m + 1 < kHours)
                neighbours.push_back(dv.values[m + 1]);
            else if (j < raw.size())
                neighbours.push_back(raw[j].value);
            if (neighbours.empty())
                throw ValidationError("cannot impute isolated hour on " + format_date(day));
            dv.values[m] = std::accumulate(neighbours.begin(), neighbours.end(), 0.0) /
                           static_cast<double>(neighbours.size());
        }
        out.push_back(dv);
        i = j;
    }
    return out;
}

namespace {

struct HourlyRow {
    LocalTimestamp ts;
    std::string raw;
    double price = 0.0;
    double load = 0.0;
    double res = 0.0;
};

}  // namespace

MarketDataset load_csv(const std::filesystem::path& hourly, const std::filesystem::path& daily,
                       const CsvSchema& schema) {
    const csv::Table table = csv::read(hourly);
    const size_t c_ts = table.column(schema.timestamp);
    const size_t c_price = table.column(schema.price);
    const size_t c_load = table.column(schema.load);
    const size_t c_res = table.column(schema.res);

    std::vector<HourlyRow> rows;
    rows.reserve(table.rows.size());
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& f = table.rows[r];
        const std::string ctx = hourly.string() + ":" + std::to_string(table.line_numbers[r]);
        HourlyRow row;
        row.raw = f[c_ts];
        row.ts = parse_timestamp(row.raw);
        row.price = csv::parse_double(f[c_price], ctx);
        row.load = csv::parse_double(f[c_load], ctx);
        row.res = csv::parse_double(f[c_res], ctx);
        if (!std::isfinite(row.price) || !std::isfinite(row.load) || !std::isfinite(row.res))
            throw ValidationError(ctx + ": non-finite value at " + row.raw);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ValidationError(hourly.string() + ": no data rows");
    std::stable_sort(rows.begin(), rows.end(), [](const HourlyRow& a, const HourlyRow& b) {
        return a.ts.utc_seconds < b.ts.utc_seconds;
    });
    for (size_t i = 1; i < rows.size(); ++i) {
        const auto diff = rows[i].ts.utc_seconds - rows[i - 1].ts.utc_seconds;
        if (diff == 0) throw ValidationError("duplicated hour at " + rows[i].raw);
        if (diff > 3600) throw ValidationError("gap at " + rows[i].raw);
        if (diff != 3600) throw ValidationError("irregular spacing at " + rows[i].raw);
    }

    // Partial edge days.
    size_t begin = 0;
    size_t end = rows.size();
    if (rows[begin].ts.local_hour != 0) {
        const Date d = rows[begin].ts.local_day;
        while (begin < end && rows[begin].ts.local_day == d) ++begin;
    }
    if (begin < end && rows[end - 1].ts.local_hour != kHours - 1) {
        const Date d = rows[end - 1].ts.local_day;
        while (end > begin && rows[end - 1].ts.local_day == d) --end;
    }
    if (begin == end) throw ValidationError(hourly.string() + ": no complete day");

    std::vector<LocalHourValue> price, load, res;
    for (size_t i = begin; i < end; ++i) {
        const auto& r = rows[i];
        price.push_back({r.ts.local_day, r.ts.local_hour, r.price});
        load.push_back({r.ts.local_day, r.ts.local_hour, r.load});
        res.push_back({r.ts.local_day, r.ts.local_hour, r.res});
    }
    const auto p = fix_dst(price);
    const auto l = fix_dst(load);
    const auto g = fix_dst(res);

    MarketDataset ds;
    const auto n = static_cast<Eigen::Index>(p.size());
    ds.prices.resize(n, kHours);
    ds.load_fc.resize(n, kHours);
    ds.res_fc.resize(n, kHours);
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto u = static_cast<size_t>(t);
        ds.dates.push_back(p[u].day);
        ds.weekday.push_back(iso_weekday_index(p[u].day));
        for (int h = 0; h < kHours; ++h) {
            const auto hu = static_cast<size_t>(h);
            ds.prices(t, h) = p[u].values[hu];
            ds.load_fc(t, h) = l[u].values[hu];
            ds.res_fc(t, h) = g[u].values[hu];
        }
    }

    // Daily commodities, forward-filled onto the hourly calendar.
    const csv::Table dtab = csv::read(daily);
    const std::array<size_t, kCommodities> c_cols{dtab.column(schema.gas), dtab.column(schema.oil),
                                                  dtab.column(schema.coal), dtab.column(schema.eua)};
    const size_t c_date = dtab.column(schema.date);
    std::map<Date, std::array<double, kCommodities>> quotes;
    for (size_t r = 0; r < dtab.rows.size(); ++r) {
        const auto& f = dtab.rows[r];
        const std::string ctx = daily.string() + ":" + std::to_string(dtab.line_numbers[r]);
        const Date d = parse_date(f[c_date]);
        std::array<double, kCommodities> v{};
        for (size_t k = 0; k < kCommodities; ++k) {
            v[k] = csv::parse_double(f[c_cols[k]], ctx);
            if (!std::isfinite(v[k])) throw ValidationError(ctx + ": non-finite commodity value");
        }
        if (!quotes.emplace(d, v).second)
            throw ValidationError(ctx + ": duplicated date " + f[c_date]);
    }
    ds.commodities.resize(n, kCommodities);
    for (Eigen::Index t = 0; t < n; ++t) {
        const Date d = ds.dates[static_cast<size_t>(t)];
        auto it = quotes.upper_bound(d);
        if (it == quotes.begin())
            throw ValidationError(daily.string() + ": no commodity observation on or before " +
                                  format_date(d));
        --it;
        for (int k = 0; k < kCommodities; ++k) ds.commodities(t, k) = it->second[static_cast<size_t>(k)];
    }
    ds.validate();
    return ds;
}

void write_market_csv(const MarketDataset& ds, const std::filesystem::path& hourly,
                      const std::filesystem::path& daily) {
    std::ostringstream h;
    h << "timestamp,price,load_fc,res_fc\n";
    for (size_t t = 0; t < ds.days(); ++t) {
        const std::string day = format_date(ds.dates[t]);
        const auto ti = static_cast<Eigen::Index>(t);
        for (int hour = 0; hour < kHours; ++hour) {
            char ts[40];
            std::snprintf(ts, sizeof ts, "%sT%02d:00:00+01:00", day.c_str(), hour);
            h << ts << ',' << csv::format_double(ds.prices(ti, hour)) << ','
              << csv::format_double(ds.load_fc(ti, hour)) << ','
              << csv::format_double(ds.res_fc(ti, hour)) << '\n';
        }
    }
    csv::write_atomic(hourly, h.str());

    std::ostringstream d;
    d << "date,gas,oil,coal,eua\n";
    for (size_t t = 0; t < ds.days(); ++t) {
        const auto ti = static_cast<Eigen::Index>(t);
        d << format_date(ds.dates[t]);
        for (int k = 0; k < kCommodities; ++k) d << ',' << csv::format_double(ds.commodities(ti, k));
        d << '\n';
    }
    csv::write_atomic(daily, d.str());
}

}  // namespace fvalue
