#pragma once

#include "fvalue/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace fvalue {

/// Battery parameters. Energy capacity equals power times block length, so one block
/// fully charges or discharges the battery.
struct BessSpec {
    std::string name;
    double energy = 3.0;         // E, MWh
    double power = 3.0;          // Pow, MW
    int block = 1;               // B, hours
    double eta_charge = 0.98;
    double eta_discharge = 0.97;
    double cost = 11.63;         // C, EUR/MWh

    /// Throws ValidationError when E != Pow * B, an efficiency is outside (0, 1] or B > 12.
    void validate() const;

    static BessSpec bess_a();  // 3 MWh, 3 MW, 1-hour blocks
    static BessSpec bess_b();  // 3 MWh, 1 MW, 3-hour blocks
};

/// First hours (1..24) of the charging and discharging blocks.
struct DaySchedule {
    int h_ch = 1;
    int h_dis = 2;

    bool feasible(int block) const {
        return h_ch >= 1 && h_ch + block <= h_dis && h_dis + block - 1 <= kHours;
    }
    friend bool operator==(const DaySchedule&, const DaySchedule&) = default;
};

struct ProfitRecord {
    Date date;
    DaySchedule schedule;
    double profit_abs = 0.0;      // EUR
    double profit_per_mwh = 0.0;  // EUR per MWh of capacity
};

/// Realised profit of `sch` against `prices` (24 actual values, hour h at index h-1).
ProfitRecord compute_profit(const DaySchedule& sch, std::span<const double> prices,
                            const BessSpec& spec, Date date = {});

/// Exhaustive search over feasible schedules maximising profit on `prices`. Ties go to the
/// smallest h_ch, then the smallest h_dis. Always returns a schedule, even at a loss.
DaySchedule select_schedule(std::span<const double> prices, const BessSpec& spec);

/// Schedules chosen on forecasts, profits realised on actual prices.
std::vector<ProfitRecord> backtest(const ForecastMatrix& forecasts, const Panel& actual,
                                   const BessSpec& spec);

/// Perfect-foresight profits.
std::vector<ProfitRecord> oracle_profit(const Panel& actual, std::span<const Date> dates,
                                        const BessSpec& spec);

}  // namespace fvalue
