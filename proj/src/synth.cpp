#include "fvalue/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace fvalue {

SynthProfile parse_profile(std::string_view s) {
    if (s == "duck") return SynthProfile::Duck;
    if (s == "flat") return SynthProfile::Flat;
    if (s == "spiky") return SynthProfile::Spiky;
    throw ValidationError("unknown synthetic profile '" + std::string(s) + "'");
}

std::string to_string(SynthProfile p) {
    switch (p) {
        case SynthProfile::Duck: return "duck";
        case SynthProfile::Flat: return "flat";
        case SynthProfile::Spiky: return "spiky";
    }
    return "?";
}

namespace {

double bump(double h, double centre, double width) {
    const double z = (h - centre) / width;
    return std::exp(-0.5 * z * z);
}

}  // namespace

// Morning shoulder at 08:00, evening peak around 19:30, solar trough around 13:30.
std::array<double, kHours> duck_base_curve() {
    std::array<double, kHours> curve{};
    for (int h = 1; h <= kHours; ++h) {
        const double x = h;
        curve[static_cast<size_t>(h - 1)] =
            12.0 * bump(x, 8.0, 1.5) + 25.0 * bump(x, 19.5, 1.8) - 20.0 * bump(x, 13.5, 2.2);
    }
    return curve;
}

// Generator parameters:
//   commodities  geometric random walks (gas 20, oil 60, coal 80, EUA 25; daily vol 2/1.5/1.5/2 %),
//                held constant over weekends
//   load         55 GW + 8 GW intraday shape + 4 GW annual cycle - 6 GW on weekends + N(0, 0.8 GW)
//   RES          wind AR(1) around 15 GW (phi 0.8, sd 4 GW) + solar bell 06:00-20:00 scaled by a
//                seasonal and cloudiness factor (peak up to 25 GW)
//   price level  15 + 1.2 gas(t-2) + 0.3 EUA(t-2) + 8 cos(annual) + AR(1) shock (phi 0.7, sd 4)
//   duck/spiky   level + (1 + 0.3 sin(annual)) * duck curve + 1e-3 (load - 55 GW)
//                - 6e-4 (RES - 15 GW) + N(0, 3); spiky adds rare positive and negative jumps
//   flat         level only, constant within each day
MarketDataset synth_market(std::uint64_t seed, int days, SynthProfile profile, Date start) {
    if (days < 15) throw ValidationError("synth_market requires at least 15 days");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    MarketDataset ds;
    const auto n = static_cast<Eigen::Index>(days);
    ds.prices.resize(n, kHours);
    ds.load_fc.resize(n, kHours);
    ds.res_fc.resize(n, kHours);
    ds.commodities.resize(n, kCommodities);

    const std::array<double, kCommodities> start_level{20.0, 60.0, 80.0, 25.0};
    const std::array<double, kCommodities> vol{0.02, 0.015, 0.015, 0.02};
    std::array<double, kCommodities> log_level{};
    for (size_t k = 0; k < kCommodities; ++k) log_level[k] = std::log(start_level[k]);

    const auto duck = duck_base_curve();
    double wind = 15000.0;
    double shock = 0.0;
    constexpr double two_pi = 2.0 * std::numbers::pi;

    for (Eigen::Index t = 0; t < n; ++t) {
        const Date d = start + std::chrono::days{t};
        const int wd = iso_weekday_index(d);
        ds.dates.push_back(d);
        ds.weekday.push_back(wd);
        const bool weekend = wd >= 5;
        const double season = two_pi * static_cast<double>(t) / 365.25;

        for (size_t k = 0; k < kCommodities; ++k) {
            const double step = vol[k] * normal(rng);
            if (!weekend) log_level[k] += step;
            ds.commodities(t, static_cast<Eigen::Index>(k)) = std::exp(log_level[k]);
        }

        wind = 15000.0 + 0.8 * (wind - 15000.0) + 4000.0 * normal(rng);
        const double daily_wind = std::max(500.0, wind);
        const double solar_peak = 25000.0 * (0.6 - 0.4 * std::cos(season)) * (0.5 + 0.5 * unit(rng));
        for (int h = 0; h < kHours; ++h) {
            const double hour = h + 1;
            const double shape = std::sin(std::numbers::pi * (hour - 4.0) / 20.0);
            ds.load_fc(t, h) = 55000.0 + 8000.0 * std::max(0.0, shape) * shape +
                               4000.0 * std::cos(season) - (weekend ? 6000.0 : 0.0) +
                               800.0 * normal(rng);
            const double sun = hour > 6.0 && hour < 20.0
                                   ? std::sin(std::numbers::pi * (hour - 6.0) / 14.0)
                                   : 0.0;
            ds.res_fc(t, h) = std::max(0.0, daily_wind + 500.0 * normal(rng)) + solar_peak * sun;
        }

        shock = 0.7 * shock + 4.0 * normal(rng);
        const Eigen::Index lag = t >= 2 ? t - 2 : 0;
        const double level = 15.0 + 1.2 * ds.commodities(lag, 0) + 0.3 * ds.commodities(lag, 3) +
                             8.0 * std::cos(season) + shock;
        const double amplitude = 1.0 + 0.3 * std::sin(season);
        for (int h = 0; h < kHours; ++h) {
            if (profile == SynthProfile::Flat) {
                ds.prices(t, h) = level;
                continue;
            }
            double p = level + amplitude * duck[static_cast<size_t>(h)] +
                       1e-3 * (ds.load_fc(t, h) - 55000.0) - 6e-4 * (ds.res_fc(t, h) - 15000.0) +
                       3.0 * normal(rng);
            if (profile == SynthProfile::Spiky) {
                const double u = unit(rng);
                if (u < 0.03)
                    p += 50.0 + 150.0 * unit(rng);
                else if (u < 0.04)
                    p -= 20.0 + 60.0 * unit(rng);
            }
            ds.prices(t, h) = p;
        }
    }
    ds.validate();
    return ds;
}

}  // namespace fvalue
