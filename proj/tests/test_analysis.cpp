#include "fvalue/analysis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace fvalue;

namespace {

PoolOutcome outcome(Family f, int window, double metric, double profit) {
    PoolOutcome o;
    o.spec = ForecastSpec{f, DepVar::Direct, false, Estimator::Heterogeneous, window};
    o.member_id = o.spec.id();
    o.metrics.rmse = o.metrics.mae = o.metrics.cov_e = o.metrics.corr_f = o.metrics.mhd = o.metrics.mpd = metric;
    o.mean_profit = profit;
    return o;
}

std::vector<Date> days_from(Date d0, int n) {
    std::vector<Date> out;
    for (int i = 0; i < n; ++i) out.push_back(d0 + std::chrono::days{i});
    return out;
}

struct ToyPool {
    Panel actual;
    std::vector<Date> dates;
    std::vector<Panel> forecasts;
    std::vector<std::vector<double>> profits;
    std::vector<MemberSeries> members;
};

ToyPool toy_pool(int members, int days, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    ToyPool p;
    p.dates = days_from(Date{std::chrono::year{2020} / 12 / 20}, days);
    p.actual.resize(days, 24);
    for (Eigen::Index i = 0; i < p.actual.size(); ++i) p.actual.data()[i] = 50.0 + 10.0 * n(rng);
    p.forecasts.resize(static_cast<size_t>(members));
    p.profits.resize(static_cast<size_t>(members));
    for (int m = 0; m < members; ++m) {
        p.forecasts[m] = p.actual;
        for (Eigen::Index i = 0; i < p.actual.size(); ++i) p.forecasts[m].data()[i] += (1.0 + m) * n(rng);
        for (int t = 0; t < days; ++t) p.profits[m].push_back(20.0 - m + n(rng));
    }
    const Family fam[] = {Family::ARX, Family::NARX, Family::LEAR};
    for (int m = 0; m < members; ++m)
        p.members.push_back({ForecastSpec{fam[m % 3], DepVar::Direct, m % 2 == 0, Estimator::Pooled, 10 + m},
                             &p.forecasts[m], &p.profits[m]});
    return p;
}

}  // namespace

TEST(Analysis, IdenticalMetricIsFlaggedZero) {
    std::vector<PoolOutcome> o{outcome(Family::ARX, 1, 3.0, 1.0), outcome(Family::ARX, 2, 3.0, 2.0),
                               outcome(Family::ARX, 3, 3.0, 5.0)};
    const auto c = pool_correlation(o, PoolSubset::All);
    ASSERT_TRUE(c);
    for (const auto& k : *c) {
        EXPECT_TRUE(k.degenerate);
        EXPECT_EQ(k.value, 0.0);
    }
}

TEST(Analysis, AntiConcordantIsMinusOne) {
    std::vector<PoolOutcome> o;
    for (int i = 0; i < 6; ++i) o.push_back(outcome(Family::LEAR, i + 1, i * 1.5, std::exp(-i)));
    const auto c = pool_correlation(o, PoolSubset::LEAR);
    ASSERT_TRUE(c);
    for (const auto& k : *c) EXPECT_DOUBLE_EQ(k.value, -1.0);
}

TEST(Analysis, FiveMemberHandExample) {
    // metric ranks 1..5, profit ranks [2,1,4,3,5]: d^2 sum = 1+1+1+1+0 = 4,
    // rho = 1 - 6*4/(5*24) = 0.8
    std::vector<PoolOutcome> o;
    const double metric[] = {0.1, 0.2, 0.3, 0.4, 0.5};
    const double profit[] = {20, 10, 40, 30, 50};
    for (int i = 0; i < 5; ++i) o.push_back(outcome(Family::NARX, i + 1, metric[i], profit[i]));
    const auto c = pool_correlation(o, PoolSubset::All);
    ASSERT_TRUE(c);
    EXPECT_NEAR((*c)[0].value, 0.8, 1e-12);
}

TEST(Analysis, SubsetsAndMinimumSize) {
    std::vector<PoolOutcome> o{outcome(Family::ARX, 1, 1, 1), outcome(Family::ARX, 2, 2, 2),
                               outcome(Family::NARX, 1, 3, 3), outcome(Family::NARX, 2, 1, 1),
                               outcome(Family::NARX, 3, 2, 5)};
    EXPECT_FALSE(pool_correlation(o, PoolSubset::ARX));
    EXPECT_FALSE(pool_correlation(o, PoolSubset::LEAR));
    EXPECT_TRUE(pool_correlation(o, PoolSubset::NARX));
    EXPECT_TRUE(pool_correlation(o, PoolSubset::All));
}

TEST(Analysis, PoolCorrelationMonotoneInvariance) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n;
    std::vector<PoolOutcome> a, b;
    for (int i = 0; i < 12; ++i) {
        const double m = n(rng), p = m + n(rng);
        a.push_back(outcome(Family::ARX, i + 1, m, p));
        b.push_back(outcome(Family::ARX, i + 1, std::exp(m), 3.0 * p + 7.0));
    }
    const auto ca = *pool_correlation(a, PoolSubset::All);
    const auto cb = *pool_correlation(b, PoolSubset::All);
    for (size_t k = 0; k < ca.size(); ++k) EXPECT_EQ(ca[k].value, cb[k].value);
}

TEST(Analysis, FullWindowRollingEqualsPoolCorrelation) {
    auto p = toy_pool(7, 30, 1);
    std::vector<PoolOutcome> outcomes;
    for (const auto& m : p.members) {
        double s = 0.0;
        for (double v : *m.profits) s += v;
        outcomes.push_back({m.spec.id(), m.spec, evaluate_metrics(p.actual, *m.forecast), s / 30.0});
    }
    const auto full = *pool_correlation(outcomes, PoolSubset::All);
    const auto rc = rolling_correlation(p.actual, p.dates, p.members, PoolSubset::All, 30, 1);
    ASSERT_EQ(rc.coefficients.size(), 1u);
    for (size_t k = 0; k < full.size(); ++k) EXPECT_EQ(rc.coefficients[0][k].value, full[k].value);
}

TEST(Analysis, TwoWindowHandOracle) {
    auto p = toy_pool(3, 6, 2);
    const auto rc = rolling_correlation(p.actual, p.dates, p.members, PoolSubset::All, 5, 1);
    ASSERT_EQ(rc.coefficients.size(), 2u);
    EXPECT_EQ(rc.window_start[1], p.dates[1]);
    for (int w = 0; w < 2; ++w) {
        std::vector<double> rm, pr;
        for (const auto& m : p.members) {
            const Panel a = p.actual.middleRows(w, 5), f = m.forecast->middleRows(w, 5);
            rm.push_back(rmse(ErrorPanel::from(a, f)));
            double s = 0.0;
            for (int t = w; t < w + 5; ++t) s += (*m.profits)[t];
            pr.push_back(s / 5.0);
        }
        EXPECT_EQ(rc.coefficients[w][0].value, spearman(rm, pr).value);
    }
}

TEST(Analysis, RollingRangeStrideAndShiftInvariance) {
    auto p = toy_pool(9, 40, 3);
    const auto rc = rolling_correlation(p.actual, p.dates, p.members, PoolSubset::All, 10, 1);
    EXPECT_EQ(rc.coefficients.size(), 31u);
    for (const auto& c : rc.coefficients)
        for (const auto& k : c) {
            EXPECT_GE(k.value, -1.0);
            EXPECT_LE(k.value, 1.0);
        }
    const auto strided = rolling_correlation(p.actual, p.dates, p.members, PoolSubset::All, 10, 7);
    EXPECT_EQ(strided.coefficients.size(), 5u);
    for (size_t w = 0; w < strided.coefficients.size(); ++w)
        for (size_t k = 0; k < 6; ++k)
            EXPECT_EQ(strided.coefficients[w][k].value, rc.coefficients[w * 7][k].value);

    auto shifted = p;
    for (size_t m = 0; m < shifted.members.size(); ++m) {
        for (auto& v : shifted.profits[m]) v += 100.0;
        shifted.members[m].forecast = &shifted.forecasts[m];
        shifted.members[m].profits = &shifted.profits[m];
    }
    const auto rs = rolling_correlation(shifted.actual, shifted.dates, shifted.members, PoolSubset::All, 10, 1);
    for (size_t w = 0; w < rc.coefficients.size(); ++w)
        for (size_t k = 0; k < 6; ++k) EXPECT_EQ(rs.coefficients[w][k].value, rc.coefficients[w][k].value);

    EXPECT_THROW(rolling_correlation(p.actual, p.dates, p.members, PoolSubset::All, 41, 1), ValidationError);
}

TEST(Analysis, YearlyStatsHandExample) {
    const auto dates = days_from(Date{std::chrono::year{2021} / 6 / 1}, 2);
    std::vector<ProfitRecord> oracle;
    for (size_t t = 0; t < 2; ++t) {
        ProfitRecord r;
        r.date = dates[t];
        r.profit_per_mwh = 10.0 + t;
        oracle.push_back(r);
    }
    const auto rows = yearly_stats(oracle, {{1.0, 3.0}, {5.0, 7.0}});
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].year, 2021);
    EXPECT_DOUBLE_EQ(rows[0].oracle, 10.5);
    EXPECT_DOUBLE_EQ(rows[0].max, 6.0);
    EXPECT_DOUBLE_EQ(rows[0].min, 2.0);
    EXPECT_DOUBLE_EQ(rows[0].mean, 4.0);
    EXPECT_DOUBLE_EQ(rows[0].std, 2.0);
}

TEST(Analysis, YearlyStatsIdenticalMembersAndYears) {
    const auto dates = days_from(Date{std::chrono::year{2020} / 12 / 30}, 4);
    std::vector<ProfitRecord> oracle(4);
    for (size_t t = 0; t < 4; ++t) {
        oracle[t].date = dates[t];
        oracle[t].profit_per_mwh = 9.0;
    }
    const std::vector<double> m{1.0, 2.0, 3.0, 4.0};
    const auto rows = yearly_stats(oracle, {m, m, m});
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].year, 2020);
    EXPECT_EQ(rows[0].days, 2);
    for (const auto& r : rows) {
        EXPECT_EQ(r.max, r.min);
        EXPECT_EQ(r.mean, r.max);
        EXPECT_EQ(r.std, 0.0);
        EXPECT_GE(r.oracle, r.max);
    }
    EXPECT_THROW(yearly_stats({}, {m}), ValidationError);
}
