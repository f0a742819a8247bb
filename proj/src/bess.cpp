#include "fvalue/bess.hpp"

#include <array>
#include <cmath>

namespace fvalue {

void BessSpec::validate() const {
    const std::string who = name.empty() ? std::string("BESS") : name;
    if (block < 1 || block > 12) throw ValidationError(who + ": block length must be in 1..12");
    if (!(power > 0.0) || !(energy > 0.0)) throw ValidationError(who + ": non-positive rating");
    if (std::abs(energy - power * block) > 1e-9 * energy)
        throw ValidationError(who + ": energy capacity must equal power x block length");
    if (!(eta_charge > 0.0 && eta_charge <= 1.0) || !(eta_discharge > 0.0 && eta_discharge <= 1.0))
        throw ValidationError(who + ": efficiencies must lie in (0, 1]");
    if (!std::isfinite(cost)) throw ValidationError(who + ": non-finite operating cost");
}

BessSpec BessSpec::bess_a() { return {"BESS-a", 3.0, 3.0, 1, 0.98, 0.97, 11.63}; }

BessSpec BessSpec::bess_b() { return {"BESS-b", 3.0, 1.0, 3, 0.98, 0.97, 11.63}; }

namespace {

// Sum of P over the block starting at hour `start` (1-based), summed in hour order.
double block_sum(std::span<const double> prices, int start, int block) {
    double s = 0.0;
    for (int i = 0; i < block; ++i) s += prices[static_cast<size_t>(start - 1 + i)];
    return s;
}

double objective(double charge_sum, double discharge_sum, const BessSpec& spec) {
    return spec.eta_discharge * (spec.power * discharge_sum) -
           (spec.power * charge_sum) / spec.eta_charge - 2.0 * spec.cost * spec.energy;
}

void check_prices(std::span<const double> prices) {
    if (prices.size() != static_cast<size_t>(kHours))
        throw ValidationError("expected 24 hourly prices, got " + std::to_string(prices.size()));
}

}  // namespace

ProfitRecord compute_profit(const DaySchedule& sch, std::span<const double> prices,
                            const BessSpec& spec, Date date) {
    check_prices(prices);
    if (!sch.feasible(spec.block))
        throw ValidationError("infeasible schedule (h_ch=" + std::to_string(sch.h_ch) +
                              ", h_dis=" + std::to_string(sch.h_dis) + ")");
    ProfitRecord rec;
    rec.date = date;
    rec.schedule = sch;
    rec.profit_abs = objective(block_sum(prices, sch.h_ch, spec.block),
                               block_sum(prices, sch.h_dis, spec.block), spec);
    rec.profit_per_mwh = rec.profit_abs / spec.energy;
    return rec;
}

DaySchedule select_schedule(std::span<const double> prices, const BessSpec& spec) {
    check_prices(prices);
    const int B = spec.block;
    const int last_start = kHours - B + 1;
    std::array<double, kHours + 1> sums{};
    for (int s = 1; s <= last_start; ++s) sums[static_cast<size_t>(s)] = block_sum(prices, s, B);

    DaySchedule best{1, 1 + B};
    bool have = false;
    double best_value = 0.0;
    for (int ch = 1; ch + B <= last_start; ++ch)
        for (int dis = ch + B; dis <= last_start; ++dis) {
            const double v = objective(sums[static_cast<size_t>(ch)], sums[static_cast<size_t>(dis)], spec);
            if (!have || v > best_value) {
                best_value = v;
                best = {ch, dis};
                have = true;
            }
        }
    return best;
}

std::vector<ProfitRecord> backtest(const ForecastMatrix& forecasts, const Panel& actual,
                                   const BessSpec& spec) {
    if (forecasts.values.rows() != actual.rows() || actual.cols() != kHours ||
        forecasts.values.cols() != kHours ||
        forecasts.dates.size() != static_cast<size_t>(actual.rows()))
        throw ValidationError("backtest: forecast and actual day ranges are misaligned");
    std::vector<ProfitRecord> out;
    out.reserve(forecasts.dates.size());
    for (Eigen::Index t = 0; t < actual.rows(); ++t) {
        const auto fc = forecasts.values.row(t);
        const auto ac = actual.row(t);
        const DaySchedule sch = select_schedule({fc.data(), kHours}, spec);
        out.push_back(compute_profit(sch, {ac.data(), kHours}, spec,
                                     forecasts.dates[static_cast<size_t>(t)]));
    }
    return out;
}

std::vector<ProfitRecord> oracle_profit(const Panel& actual, std::span<const Date> dates,
                                        const BessSpec& spec) {
    if (dates.size() != static_cast<size_t>(actual.rows()) || actual.cols() != kHours)
        throw ValidationError("oracle_profit: dates and prices are misaligned");
    std::vector<ProfitRecord> out;
    out.reserve(dates.size());
    for (Eigen::Index t = 0; t < actual.rows(); ++t) {
        const auto ac = actual.row(t);
        const std::span<const double> p{ac.data(), kHours};
        out.push_back(compute_profit(select_schedule(p, spec), p, spec, dates[static_cast<size_t>(t)]));
    }
    return out;
}

}  // namespace fvalue
