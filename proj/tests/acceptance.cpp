#include "fvalue/analysis.hpp"
#include "fvalue/bess.hpp"
#include "fvalue/config.hpp"
#include "fvalue/io.hpp"
#include "fvalue/linear.hpp"
#include "fvalue/metrics.hpp"
#include "fvalue/narx.hpp"
#include "fvalue/pipeline.hpp"
#include "fvalue/transform.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include <unistd.h>

using namespace fvalue;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::array<double, kHours> constant_day(double v) {
    std::array<double, kHours> p;
    p.fill(v);
    return p;
}

// Profit of a schedule written out from the definition, independent of the library.
double direct_profit(std::span<const double> p, int h_ch, int h_dis, const BessSpec& s) {
    double ch = 0.0, dis = 0.0;
    for (int k = 0; k < s.block; ++k) {
        ch += p[static_cast<size_t>(h_ch - 1 + k)];
        dis += p[static_cast<size_t>(h_dis - 1 + k)];
    }
    return s.eta_discharge * s.power * dis - s.power * ch / s.eta_charge - 2.0 * s.cost * s.energy;
}

Outcome profit_exactness() {
    const auto a = BessSpec::bess_a();
    const auto zero = constant_day(0.0);
    const auto r0 = compute_profit({1, 2}, zero, a);
    auto p = constant_day(50.0);
    p[4] = 10.0;
    p[17] = 100.0;
    const auto r1 = compute_profit({5, 18}, p, a);
    const double exact = 0.97 * 3.0 * 100.0 - 3.0 * 10.0 / 0.98 - 2.0 * 11.63 * 3.0;
    const bool ok = std::abs(r0.profit_abs + 69.78) <= 1e-9 && std::abs(r0.profit_per_mwh + 23.26) <= 1e-9 &&
                    std::abs(r1.profit_abs - exact) <= 1e-9 && std::abs(r1.profit_abs - 190.60776) <= 5e-6;
    return {ok, "zero day " + fmt("%.9f", r0.profit_abs) + " EUR / " + fmt("%.9f", r0.profit_per_mwh) +
                    " EUR/MWh, 10->100 day " + fmt("%.9f", r1.profit_abs) + " EUR (closed form " +
                    fmt("%.9f", exact) + ", quoted 190.60776 to 5 decimals)"};
}

Outcome brute_force() {
    std::mt19937_64 rng(1000);
    std::normal_distribution<double> n(60.0, 40.0);
    std::uniform_int_distribution<int> coarse(0, 6);
    int mismatches = 0, cases = 0;
    for (int block = 1; block <= 3; ++block) {
        BessSpec s = BessSpec::bess_a();
        s.block = block;
        s.power = s.energy / block;
        for (int k = 0; k < 1000; ++k) {
            std::array<double, kHours> p;
            // Every fourth vector uses a coarse grid so that ties actually occur.
            for (auto& v : p) v = k % 4 == 0 ? 10.0 * coarse(rng) : n(rng);
            int bc = 0, bd = 0;
            double best = -INFINITY;
            for (int hc = 1; hc <= kHours; ++hc)
                for (int hd = hc + block; hd + block - 1 <= kHours; ++hd) {
                    const double v = direct_profit(p, hc, hd, s);
                    if (v > best) {
                        best = v;
                        bc = hc;
                        bd = hd;
                    }
                }
            const auto got = select_schedule(p, s);
            ++cases;
            if (got.h_ch != bc || got.h_dis != bd) ++mismatches;
        }
    }
    return {mismatches == 0, std::to_string(cases) + " vectors, " + std::to_string(mismatches) + " mismatches"};
}

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> n;
    Matrix X(rows, cols);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = n(rng);
    return X;
}

Outcome lasso_degeneracy() {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n;
    const Matrix X = random_matrix(rng, 200, 10);
    Vector beta(10);
    beta << 1.5, -2.0, 0.0, 0.3, 4.0, -0.1, 0.0, 2.2, -3.3, 0.7;
    Vector y = (X * beta).array() + 5.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += 0.5 * n(rng);
    Matrix Xi(200, 11);
    Xi << Vector::Ones(200), X;
    const Vector ols = (Xi.transpose() * Xi).ldlt().solve(Xi.transpose() * y);
    const auto fit0 = lasso_fit(X, y, {0.0});
    const double d0 = std::max((fit0.coefficients - ols.tail(10)).cwiseAbs().maxCoeff(),
                               std::abs(fit0.intercept - ols(0)));

    const auto prob = StandardizedProblem::make(X, y);
    bool killed = true;
    for (double mult : {1.0, 1.01, 3.0}) {
        const auto f = lasso_fit(X, y, {prob.lambda_max() * mult});
        killed = killed && (f.coefficients.array() == 0.0).all();
    }

    Vector x(50), z(50);
    for (int i = 0; i < 50; ++i) {
        x(i) = n(rng);
        z(i) = 0.8 * x(i) + n(rng);
    }
    x = (x.array() - x.mean()).matrix();
    x /= std::sqrt(x.squaredNorm() / 50.0);
    const double b = x.dot(z - Vector::Constant(50, z.mean())) / 50.0;
    double d1 = 0.0;
    for (double lambda : {0.0, 0.05, 0.2, 0.5, 1.0}) {
        const double expected = std::copysign(std::max(std::abs(b) - lambda, 0.0), b);
        d1 = std::max(d1, std::abs(lasso_fit(x, z, {lambda}).coefficients(0) - expected));
    }
    return {d0 <= 1e-6 && killed && d1 <= 1e-8,
            "lambda=0 vs OLS " + fmt("%.2e", d0) + ", kill " + (killed ? "exact" : "incomplete") +
                ", soft-threshold " + fmt("%.2e", d1)};
}

Outcome narx_gradient() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    NarxNet net = NarxNet::zeros(3);
    Vector theta(NarxNet::parameter_count(3));
    for (Eigen::Index k = 0; k < theta.size(); ++k) theta(k) = u(rng);
    net.unpack(theta);
    Matrix xs(25, 3);
    for (Eigen::Index i = 0; i < xs.size(); ++i) xs.data()[i] = u(rng);
    const Matrix J = narx_jacobian(net, xs);
    const double h = 1e-6;
    double worst = 0.0;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        Vector tp = theta, tm = theta;
        tp(k) += h;
        tm(k) -= h;
        NarxNet np = net, nm = net;
        np.unpack(tp);
        nm.unpack(tm);
        for (Eigen::Index r = 0; r < xs.rows(); ++r) {
            const double fd =
                (np.predict_scaled(xs.row(r).transpose()) - nm.predict_scaled(xs.row(r).transpose())) / (2 * h);
            const double scale = std::max(std::abs(J(r, k)), std::abs(fd));
            if (scale < 1e-8) continue;
            worst = std::max(worst, std::abs(J(r, k) - fd) / scale);
        }
    }
    return {worst < 1e-4, std::to_string(theta.size()) + " parameters, max relative error " + fmt("%.2e", worst)};
}

Outcome cov_e_correctness() {
    Panel hand(2, 2);
    hand << std::sqrt(2.0), 0.0, 0.0, std::sqrt(2.0);
    const auto h = cov_e(ErrorPanel{hand});
    const bool hand_ok = !h.singular && h.value == 0.0;

    std::mt19937_64 rng(6);
    std::normal_distribution<double> n(0.0, 3.0);
    double worst_det = 0.0, worst_scale = 0.0;
    for (int k = 0; k < 100; ++k) {
        Panel e(30, 4);
        for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = n(rng) + (k % 3);
        const Eigen::Matrix4d sigma = (e.transpose() * e) / 30.0;
        const double got = cov_e(ErrorPanel{e}).value;
        worst_det = std::max(worst_det, std::abs(got - std::log(sigma.determinant())));
        for (double scale : {0.5, 2.0, 10.0}) {
            const Panel s = e * std::sqrt(scale);
            worst_scale = std::max(worst_scale, std::abs(cov_e(ErrorPanel{s}).value - got - 4.0 * std::log(scale)));
        }
    }
    return {hand_ok && worst_det <= 1e-10 && worst_scale <= 1e-9,
            "hand " + fmt("%.1e", h.value) + ", determinant oracle " + fmt("%.2e", worst_det) + ", scaling " +
                fmt("%.2e", worst_scale)};
}

Outcome metric_invariance() {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(50.0, 20.0);
    const auto market = synth_market(7, 60, SynthProfile::Duck);
    const Panel& actual = market.prices;
    Panel f = actual;
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] += 0.3 * n(rng) - 15.0;

    bool invariant = true, rmse_moved = false;
    const std::vector<std::function<double(double)>> maps{
        [](double v) { return 3.0 * v + 7.0; }, [](double v) { return std::exp(v / 50.0); },
        [](double v) { return std::asinh(v); }, [](double v) { return v * v * v; }};
    const auto base = evaluate_metrics(actual, f);
    for (const auto& g : maps) {
        const Panel m = f.unaryExpr(g);
        const auto r = evaluate_metrics(actual, m);
        invariant = invariant && r.corr_f == base.corr_f && r.mhd == base.mhd && r.mpd == base.mpd;
        rmse_moved = rmse_moved || r.rmse != base.rmse;
    }

    int violations = 0;
    for (int k = 0; k < 1000; ++k) {
        Panel a(1 + k % 5, kHours), b(1 + k % 5, kHours);
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            a.data()[i] = n(rng);
            b.data()[i] = n(rng);
        }
        const auto e = ErrorPanel::from(a, b);
        if (rmse(e) < mae(e)) ++violations;
    }

    const auto perfect = evaluate_metrics(actual, actual);
    const bool perfect_ok = perfect.rmse == 0.0 && perfect.mae == 0.0 && perfect.mhd == 0.0 && perfect.mpd == 0.0 &&
                            perfect.corr_f == 1.0;
    ForecastMatrix fm;
    fm.dates = market.dates;
    fm.values = actual;
    bool profit_ok = true;
    for (const auto& spec : {BessSpec::bess_a(), BessSpec::bess_b()}) {
        const auto bt = backtest(fm, actual, spec);
        const auto oracle = oracle_profit(actual, market.dates, spec);
        for (size_t d = 0; d < bt.size(); ++d) profit_ok = profit_ok && bt[d].profit_abs == oracle[d].profit_abs;
    }
    return {invariant && rmse_moved && violations == 0 && perfect_ok && profit_ok,
            std::string("monotone maps ") + (invariant ? "invariant" : "NOT invariant") +
                (rmse_moved ? ", RMSE moved" : ", RMSE unchanged") + ", RMSE<MAE on " + std::to_string(violations) +
                "/1000, perfect forecast " + (perfect_ok && profit_ok ? "ok" : "wrong")};
}

double mean_of(const std::vector<ProfitRecord>& r) {
    double s = 0.0;
    for (const auto& x : r) s += x.profit_per_mwh;
    return s / static_cast<double>(r.size());
}

struct MixedPool {
    MarketDataset market;
    std::vector<Panel> forecasts;
    std::vector<std::vector<double>> profits;
    std::vector<PoolOutcome> outcomes;
};

// Level-shifted and shape-scrambled forecasts of a synthetic duck market.
struct Separation {
    Outcome outcome;
    MixedPool pool;
};

Separation separation_experiment() {
    const auto full = synth_market(2024, 130, SynthProfile::Duck);
    const MarketDataset market = full.slice(30, 100);
    const Panel& actual = market.prices;
    const auto spec = BessSpec::bess_a();
    std::mt19937_64 rng(99);

    Panel scrambled = actual;
    std::vector<int> perm(kHours);
    std::iota(perm.begin(), perm.end(), 0);
    for (Eigen::Index t = 0; t < actual.rows(); ++t) {
        std::shuffle(perm.begin(), perm.end(), rng);
        for (int h = 0; h < kHours; ++h) scrambled(t, h) = actual(t, perm[static_cast<size_t>(h)]);
    }
    const Panel shape_error = scrambled - actual;  // zero sum on every day
    const double d = rmse(ErrorPanel{shape_error});

    std::bernoulli_distribution coin(0.5);
    Panel signs(actual.rows(), 1);
    for (Eigen::Index t = 0; t < actual.rows(); ++t) signs(t, 0) = coin(rng) ? 1.0 : -1.0;
    auto level_shift = [&](double size) {
        Panel out(actual.rows(), kHours);
        for (Eigen::Index t = 0; t < actual.rows(); ++t) out.row(t).setConstant(size * signs(t, 0));
        return out;
    };

    const Panel fa = actual + level_shift(d);
    const Panel& fb = scrambled;
    const double rmse_a = rmse(ErrorPanel::from(actual, fa)), rmse_b = rmse(ErrorPanel::from(actual, fb));
    auto profit_of = [&](const Panel& f) {
        ForecastMatrix fm;
        fm.dates = market.dates;
        fm.values = f;
        return backtest(fm, actual, spec);
    };
    const double pa = mean_of(profit_of(fa)), pb = mean_of(profit_of(fb));

    Separation out;
    out.pool.market = market;
    std::uniform_real_distribution<double> level(0.0, 3.0 * d);
    for (int k = 0; k < 20; ++k) {
        const double alpha = k / 19.0;
        const Panel f = actual + alpha * shape_error + level_shift(level(rng));
        const auto recs = profit_of(f);
        std::vector<double> per_mwh;
        for (const auto& r : recs) per_mwh.push_back(r.profit_per_mwh);
        PoolOutcome o;
        o.spec = {Family::ARX, DepVar::Direct, false, Estimator::Heterogeneous, 10 + k};
        o.member_id = o.spec.id();
        o.metrics = evaluate_metrics(actual, f);
        double s = 0.0;
        for (double v : per_mwh) s += v;
        o.mean_profit = s / static_cast<double>(per_mwh.size());
        out.pool.forecasts.push_back(f);
        out.pool.profits.push_back(per_mwh);
        out.pool.outcomes.push_back(o);
    }
    const auto coeffs = pool_correlation(out.pool.outcomes, PoolSubset::All);
    const double rho_mpd = std::abs((*coeffs)[static_cast<size_t>(Metric::MPD)].value);
    const double rho_rmse = std::abs((*coeffs)[static_cast<size_t>(Metric::RMSE)].value);

    const bool matched = std::abs(rmse_a - rmse_b) <= 0.01 * rmse_b;
    out.outcome = {matched && pa > pb && rho_mpd - rho_rmse >= 0.2,
                   "RMSE " + fmt("%.3f", rmse_a) + " vs " + fmt("%.3f", rmse_b) + ", profit " + fmt("%.2f", pa) +
                       " vs " + fmt("%.2f", pb) + " EUR/MWh/day, |rho| MPD " + fmt("%.3f", rho_mpd) + " vs RMSE " +
                       fmt("%.3f", rho_rmse)};
    return out;
}

Outcome cardinality() {
    const auto full = parse_config("{}", "full.json", "full");
    const auto arx = parse_config(R"({"pool": {"families": ["ARX"]}})", "arx.json", "full");
    const size_t nf = full.pool.members().size(), na = arx.pool.members().size();
    size_t arx_avg = 0;
    for (const auto& m : arx.pool.members()) arx_avg += m.is_average();
    return {nf == 192 && na == 64 && arx_avg == 8,
            "full " + std::to_string(nf) + ", ARX-only " + std::to_string(na) + " (" + std::to_string(na - arx_avg) +
                " + " + std::to_string(arx_avg) + " averages)"};
}

Outcome rolling_degenerate(const MixedPool& pool) {
    std::vector<MemberSeries> members;
    for (size_t k = 0; k < pool.outcomes.size(); ++k)
        members.push_back({pool.outcomes[k].spec, &pool.forecasts[k], &pool.profits[k]});
    const int period = static_cast<int>(pool.market.days());
    const auto whole = rolling_correlation(pool.market.prices, pool.market.dates, members, PoolSubset::All, period);
    const auto direct = pool_correlation(pool.outcomes, PoolSubset::All);
    bool same = whole.coefficients.size() == 1;
    for (size_t m = 0; same && m < kMetrics.size(); ++m)
        same = whole.coefficients[0][m].value == (*direct)[m].value &&
               whole.coefficients[0][m].degenerate == (*direct)[m].degenerate;

    const auto series =
        rolling_correlation(pool.market.prices, pool.market.dates, members, PoolSubset::All, 30, 1, {}, 0);
    bool bounded = !series.coefficients.empty();
    for (const auto& c : series.coefficients)
        for (const auto& x : c) bounded = bounded && x.value >= -1.0 && x.value <= 1.0;
    return {same && bounded, std::string("full-window ") + (same ? "identical" : "DIFFERENT") + ", " +
                                 std::to_string(series.coefficients.size()) + " rolling windows " +
                                 (bounded ? "within [-1, 1]" : "OUT OF RANGE")};
}

Outcome vst_round_trip() {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> mag(-6.0, 6.0);
    std::bernoulli_distribution neg(0.4);
    const VstParams p{42.0, 17.5};
    double worst = 0.0;
    for (int k = 0; k < 100000; ++k) {
        const double x = (neg(rng) ? -1.0 : 1.0) * std::pow(10.0, mag(rng));
        worst = std::max(worst, std::abs(vst_invert(vst_apply(x, p), p) - x) / std::max(1.0, std::abs(x)));
    }
    return {worst <= 1e-12, "100000 values, max relative error " + fmt("%.2e", worst)};
}

Outcome desk_dominance(const fs::path& out, double& elapsed, size_t& members) {
    ConfigOverrides ov;
    ov.preset = "desk";
    ov.out = out;
    const RunConfig cfg = load_config(ov);
    members = cfg.pool.members().size();
    const auto t0 = std::chrono::steady_clock::now();
    cmd_all(cfg);
    elapsed = seconds_since(t0);

    const OutputPaths paths{out};
    size_t violations = 0, checked = 0;
    for (const auto& spec : cfg.bess) {
        const auto rows = read_profits_csv(paths.profits(spec.name));
        const MemberProfits* oracle = nullptr;
        for (const auto& m : rows)
            if (m.member_id == kOracleId) oracle = &m;
        if (!oracle) return {false, "no oracle rows for " + spec.name};
        for (const auto& m : rows) {
            if (m.member_id == kOracleId) continue;
            for (size_t d = 0; d < m.records.size(); ++d) {
                ++checked;
                if (m.records[d].profit_abs > oracle->records[d].profit_abs) ++violations;
            }
        }
    }
    return {violations == 0 && members == 32 && checked > 0,
            std::to_string(members) + " members, " + std::to_string(checked) + " member-days over " +
                std::to_string(cfg.bess.size()) + " BESS specs, " + std::to_string(violations) + " violations"};
}

}  // namespace

int main(int argc, char** argv) {
    fs::path out = fs::temp_directory_path() / ("fvalue_acceptance_" + std::to_string(::getpid()));
    if (argc > 1) out = argv[1];

    std::map<int, Outcome> results;
    const auto quick0 = std::chrono::steady_clock::now();
    results[1] = profit_exactness();
    results[3] = brute_force();
    results[6] = cov_e_correctness();
    results[7] = metric_invariance();
    const double quick = seconds_since(quick0);

    results[4] = lasso_degeneracy();
    results[5] = narx_gradient();
    auto sep = separation_experiment();
    results[8] = sep.outcome;
    results[9] = cardinality();
    results[10] = rolling_degenerate(sep.pool);
    results[11] = vst_round_trip();

    double desk = 0.0;
    size_t members = 0;
    try {
        results[2] = desk_dominance(out, desk, members);
    } catch (const std::exception& e) {
        results[2] = {false, std::string("desk run failed: ") + e.what()};
    }
    const unsigned cores = std::thread::hardware_concurrency();
    results[12] = {desk > 0.0 && desk < 600.0 && quick < 60.0,
                   "desk cmd_all " + fmt("%.1f", desk) + " s on " + std::to_string(cores) +
                       " core(s), metric+bess subsuite " + fmt("%.2f", quick) + " s"};

    const char* names[] = {"",
                           "profit equation",
                           "oracle dominance",
                           "schedule brute force",
                           "LASSO degeneracy",
                           "NARX gradient",
                           "Cov-e",
                           "metric invariance",
                           "separation experiment",
                           "pool cardinality",
                           "rolling full window",
                           "VST round trip",
                           "runtime budget"};
    int failed = 0;
    for (const auto& [id, r] : results) {
        std::printf("%-4s criterion %2d  %-22s %s\n", r.pass ? "PASS" : "FAIL", id, names[id], r.detail.c_str());
        failed += !r.pass;
    }
    std::fflush(stdout);
    if (argc <= 1) fs::remove_all(out);
    return failed == 0 ? 0 : 1;
}
