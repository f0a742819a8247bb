#include "fvalue/types.hpp"

#include <charconv>
#include <cstdio>

namespace fvalue {

using namespace std::chrono;

std::string format_date(Date d) {
    const year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

namespace {

int parse_int(std::string_view s, std::string_view whole) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ValidationError("malformed number in '" + std::string(whole) + "'");
    return v;
}

}  // namespace

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw ValidationError("malformed date '" + std::string(text) + "'");
    const year_month_day ymd{year{parse_int(text.substr(0, 4), text)},
                             month{static_cast<unsigned>(parse_int(text.substr(5, 2), text))},
                             day{static_cast<unsigned>(parse_int(text.substr(8, 2), text))}};
    if (!ymd.ok())
        throw ValidationError("invalid calendar date '" + std::string(text) + "'");
    return sys_days{ymd};
}

int iso_weekday_index(Date d) {
    // c_encoding: 0 = Sunday.
    return static_cast<int>((weekday{d}.c_encoding() + 6) % 7);
}

std::string to_string(Family f) {
    switch (f) {
        case Family::ARX: return "ARX";
        case Family::NARX: return "NARX";
        case Family::LEAR: return "LEAR";
    }
    return "?";
}

std::string to_string(DepVar d) { return d == DepVar::Direct ? "direct" : "deviation"; }

std::string to_string(Estimator e) {
    return e == Estimator::Heterogeneous ? "het" : "pooled";
}

Family parse_family(std::string_view s) {
    if (s == "ARX") return Family::ARX;
    if (s == "NARX") return Family::NARX;
    if (s == "LEAR") return Family::LEAR;
    throw ValidationError("unknown model family '" + std::string(s) + "'");
}

DepVar parse_depvar(std::string_view s) {
    if (s == "direct") return DepVar::Direct;
    if (s == "deviation") return DepVar::Deviation;
    throw ValidationError("unknown dependent variable '" + std::string(s) + "'");
}

Estimator parse_estimator(std::string_view s) {
    if (s == "het" || s == "heterogeneous") return Estimator::Heterogeneous;
    if (s == "pooled") return Estimator::Pooled;
    throw ValidationError("unknown estimator '" + std::string(s) + "'");
}

std::string ForecastSpec::id() const {
    std::string out = to_string(family) + "_" + to_string(depvar) + (vst ? "_vst-on_" : "_vst-off_") +
                      to_string(estimator) + "_";
    out += is_average() ? std::string("avg") : "w" + std::to_string(window);
    return out;
}

ForecastSpec parse_member_id(std::string_view id) {
    std::vector<std::string_view> parts;
    size_t start = 0;
    while (true) {
        const size_t pos = id.find('_', start);
        parts.push_back(id.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    if (parts.size() != 5)
        throw ValidationError("malformed member id '" + std::string(id) + "'");
    ForecastSpec spec;
    spec.family = parse_family(parts[0]);
    spec.depvar = parse_depvar(parts[1]);
    if (parts[2] == "vst-on")
        spec.vst = true;
    else if (parts[2] == "vst-off")
        spec.vst = false;
    else
        throw ValidationError("malformed member id '" + std::string(id) + "'");
    spec.estimator = parse_estimator(parts[3]);
    if (parts[4] == "avg") {
        spec.window = 0;
    } else {
        if (parts[4].size() < 2 || parts[4][0] != 'w')
            throw ValidationError("malformed member id '" + std::string(id) + "'");
        spec.window = parse_int(parts[4].substr(1), id);
    }
    return spec;
}

}  // namespace fvalue
