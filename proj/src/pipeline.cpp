#include "fvalue/pipeline.hpp"

#include "fvalue/analysis.hpp"
#include "fvalue/csv.hpp"
#include "fvalue/io.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <map>

namespace fvalue {

using nlohmann::json;

namespace {

OutputPaths paths(const RunConfig& cfg) { return {cfg.out}; }

void require_file(const std::filesystem::path& p, const char* stage) {
    if (!std::filesystem::exists(p))
        throw ValidationError("missing input '" + p.string() + "' (run the " + stage + " stage first)");
}

std::pair<std::filesystem::path, std::filesystem::path> data_files(const RunConfig& cfg) {
    if (cfg.data.source == DataConfig::Source::Csv) return {cfg.data.hourly, cfg.data.daily};
    const auto out = paths(cfg);
    return {out.hourly(), out.daily()};
}

MarketDataset load_dataset(const RunConfig& cfg) {
    const auto [hourly, daily] = data_files(cfg);
    require_file(hourly, "synth");
    require_file(daily, "synth");
    return load_csv(hourly, daily);
}

struct Manifest {
    std::vector<ForecastSpec> members;
    Date first;
    Date last;
    std::string config_hash;
};

Manifest read_manifest(const RunConfig& cfg) {
    const auto out = paths(cfg);
    require_file(out.manifest(), "forecast");
    json j;
    try {
        j = json::parse(read_text(out.manifest()));
        Manifest m;
        for (const auto& e : j.at("members")) m.members.push_back(parse_member_id(e.at("id").get<std::string>()));
        m.first = parse_date(j.at("evaluation").at("first").get<std::string>());
        m.last = parse_date(j.at("evaluation").at("last").get<std::string>());
        m.config_hash = j.at("config_hash").get<std::string>();
        if (m.config_hash != blob_sha1(cfg.canonical))
            spdlog::warn("{} was produced under a different configuration", out.manifest().string());
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(out.manifest().string() + ": malformed manifest: " + e.what());
    }
}

// Actual prices over the manifest's evaluation range.
struct Actuals {
    std::vector<Date> dates;
    Panel prices;
};

Actuals actuals(const MarketDataset& ds, const Manifest& m) {
    const size_t i0 = ds.index_of(m.first);
    const size_t i1 = ds.index_of(m.last);
    Actuals a;
    a.dates.assign(ds.dates.begin() + static_cast<std::ptrdiff_t>(i0),
                   ds.dates.begin() + static_cast<std::ptrdiff_t>(i1) + 1);
    a.prices = ds.prices.middleRows(static_cast<Eigen::Index>(i0), static_cast<Eigen::Index>(i1 - i0 + 1));
    return a;
}

std::vector<ForecastMatrix> read_forecasts(const RunConfig& cfg, const Manifest& m, const Actuals& a) {
    const auto out = paths(cfg);
    std::vector<ForecastMatrix> fms;
    for (const auto& spec : m.members) {
        require_file(out.forecast(spec.id()), "forecast");
        auto fm = read_forecast_csv(out.forecast(spec.id()), spec);
        if (fm.dates != a.dates)
            throw ValidationError(out.forecast(spec.id()).string() + ": dates differ from the evaluation period");
        fms.push_back(std::move(fm));
    }
    return fms;
}

template <typename Clock = std::chrono::steady_clock>
struct StageTimer {
    const char* name;
    typename Clock::time_point start = Clock::now();
    ~StageTimer() {
        spdlog::info("{} finished in {:.1f} s", name,
                     std::chrono::duration<double>(Clock::now() - start).count());
    }
};

}  // namespace

void cmd_synth(const RunConfig& cfg) {
    if (cfg.data.source != DataConfig::Source::Synth) {
        spdlog::info("synth: data source is csv, nothing to generate");
        return;
    }
    StageTimer timer{"synth"};
    const auto out = paths(cfg);
    std::filesystem::create_directories(out.hourly().parent_path());
    const auto ds = synth_market(cfg.seed, cfg.data.days, cfg.data.profile, cfg.data.start);
    write_market_csv(ds, out.hourly(), out.daily());
    spdlog::info("synth: {} days ({}) written to {}", ds.days(), to_string(cfg.data.profile),
                 out.hourly().parent_path().string());
}

void cmd_forecast(const RunConfig& cfg) {
    StageTimer timer{"forecast"};
    const auto out = paths(cfg);
    const auto ds = load_dataset(cfg);
    const auto range = resolve_evaluation(cfg, ds);
    const auto members = cfg.pool.members();
    spdlog::info("forecast: {} members over {}..{}", members.size(), format_date(range.first),
                 format_date(range.last));
    const auto fms = run_pool(ds, range.first, range.last, cfg.pool, cfg.models, cfg.threads);

    std::filesystem::create_directories(out.forecasts());
    json manifest;
    manifest["config_hash"] = blob_sha1(cfg.canonical);
    const auto [hourly, daily] = data_files(cfg);
    manifest["input_hash"] = {{"hourly", file_sha1(hourly)}, {"daily", file_sha1(daily)}};
    manifest["seed"] = cfg.seed;
    manifest["evaluation"] = {{"first", format_date(range.first)}, {"last", format_date(range.last)}};
    manifest["members"] = json::array();
    for (const auto& fm : fms) {
        write_forecast_csv(out.forecast(fm.spec.id()), fm);
        manifest["members"].push_back({{"id", fm.spec.id()},
                                       {"family", to_string(fm.spec.family)},
                                       {"depvar", to_string(fm.spec.depvar)},
                                       {"vst", fm.spec.vst},
                                       {"estimator", to_string(fm.spec.estimator)},
                                       {"window", fm.spec.is_average() ? json("avg") : json(fm.spec.window)},
                                       {"file", "forecasts/" + fm.spec.id() + ".csv"}});
    }
    manifest["config"] = json::parse(cfg.canonical);
    csv::write_atomic(out.manifest(), manifest.dump(2) + "\n");
}

void cmd_backtest(const RunConfig& cfg) {
    StageTimer timer{"backtest"};
    const auto out = paths(cfg);
    const auto manifest = read_manifest(cfg);
    const auto ds = load_dataset(cfg);
    const auto a = actuals(ds, manifest);
    const auto fms = read_forecasts(cfg, manifest, a);
    for (const auto& spec : cfg.bess) {
        std::vector<MemberProfits> all;
        all.push_back({kOracleId, oracle_profit(a.prices, a.dates, spec)});
        for (const auto& fm : fms) all.push_back({fm.spec.id(), backtest(fm, a.prices, spec)});
        write_profits_csv(out.profits(spec.name), all);
        spdlog::info("backtest: {} written", out.profits(spec.name).string());
    }
}

void cmd_evaluate(const RunConfig& cfg) {
    StageTimer timer{"evaluate"};
    const auto out = paths(cfg);
    const auto manifest = read_manifest(cfg);
    const auto ds = load_dataset(cfg);
    const auto a = actuals(ds, manifest);
    const auto fms = read_forecasts(cfg, manifest, a);
    std::vector<MemberMetrics> all(fms.size());
    const MetricOptions opts{cfg.analysis.centered_covariance};
    parallel_for(fms.size(), cfg.threads, [&](size_t m) {
        all[m] = {fms[m].spec.id(), evaluate_metrics(a.prices, fms[m].values, opts)};
    });
    for (const auto& m : all) {
        if (m.report.cov_e_singular) spdlog::warn("evaluate: {} has a singular error covariance", m.member_id);
        if (m.report.degenerate_days > 0)
            spdlog::warn("evaluate: {} has {} days with constant ranks", m.member_id, m.report.degenerate_days);
    }
    write_metrics_csv(out.metrics(), all);
    spdlog::info("evaluate: {} written", out.metrics().string());
}

void cmd_correlate(const RunConfig& cfg) {
    StageTimer timer{"correlate"};
    const auto out = paths(cfg);
    const auto manifest = read_manifest(cfg);
    const auto ds = load_dataset(cfg);
    const auto a = actuals(ds, manifest);
    const auto fms = read_forecasts(cfg, manifest, a);
    require_file(out.metrics(), "evaluate");
    const auto metrics = read_metrics_csv(out.metrics());
    std::map<std::string, MetricReport> by_id;
    for (const auto& m : metrics) by_id[m.member_id] = m.report;

    const auto T = static_cast<int>(a.dates.size());
    if (cfg.analysis.rolling_window > T)
        cfg.fail("analysis.rolling_window", "field 'analysis.rolling_window' exceeds the evaluation period of " +
                                                std::to_string(T) + " days");

    std::string table = "bess,kind,metric,ARX,NARX,LEAR,all\n";
    std::string rolling = "bess,subset,window_start,window_days,RMSE,MAE,Cov-e,Corr-f,MHD,MPD\n";
    std::string yearly = "bess,year,days,oracle,max,min,mean,std\n";

    for (const auto& spec : cfg.bess) {
        require_file(out.profits(spec.name), "backtest");
        const auto profits = read_profits_csv(out.profits(spec.name));
        std::map<std::string, const MemberProfits*> pid;
        for (const auto& p : profits) pid[p.member_id] = &p;
        if (!pid.count(kOracleId)) throw ValidationError(out.profits(spec.name).string() + ": no oracle rows");

        std::vector<PoolOutcome> outcomes;
        std::vector<std::vector<double>> daily(fms.size());
        std::vector<MemberSeries> series;
        for (size_t m = 0; m < fms.size(); ++m) {
            const auto id = fms[m].spec.id();
            if (!by_id.count(id)) throw ValidationError(out.metrics().string() + ": no row for " + id);
            if (!pid.count(id)) throw ValidationError(out.profits(spec.name).string() + ": no rows for " + id);
            const auto& recs = pid[id]->records;
            if (recs.size() != a.dates.size())
                throw ValidationError(out.profits(spec.name).string() + ": " + id + " has the wrong day count");
            for (size_t t = 0; t < recs.size(); ++t) {
                if (recs[t].date != a.dates[t])
                    throw ValidationError(out.profits(spec.name).string() + ": " + id + " dates are misaligned");
                daily[m].push_back(recs[t].profit_per_mwh);
            }
            double s = 0.0;
            for (double v : daily[m]) s += v;
            outcomes.push_back({id, fms[m].spec, by_id[id], s / static_cast<double>(daily[m].size())});
        }
        for (size_t m = 0; m < fms.size(); ++m) series.push_back({fms[m].spec, &fms[m].values, &daily[m]});

        std::array<std::optional<MetricCoefficients>, kSubsets.size()> full{}, mean_roll{};
        for (size_t s = 0; s < kSubsets.size(); ++s) {
            full[s] = pool_correlation(outcomes, kSubsets[s]);
            if (!full[s]) continue;
            const auto rc = rolling_correlation(a.prices, a.dates, series, kSubsets[s], cfg.analysis.rolling_window,
                                                cfg.analysis.stride, {cfg.analysis.centered_covariance}, cfg.threads);
            MetricCoefficients mean{};
            const auto mv = rc.mean();
            for (size_t k = 0; k < mv.size(); ++k) mean[k].value = mv[k];
            mean_roll[s] = mean;
            for (size_t w = 0; w < rc.window_start.size(); ++w) {
                rolling += spec.name + ',' + to_string(kSubsets[s]) + ',' + format_date(rc.window_start[w]) + ',' +
                           std::to_string(rc.window);
                for (const auto& c : rc.coefficients[w]) rolling += ',' + csv::format_double(c.value);
                rolling += '\n';
            }
        }
        auto emit = [&](const char* kind, const auto& rows) {
            for (size_t k = 0; k < kMetrics.size(); ++k) {
                table += spec.name + ',' + kind + ',' + to_string(kMetrics[k]);
                for (size_t s = 0; s < kSubsets.size(); ++s)
                    table += ',' + (rows[s] ? csv::format_double((*rows[s])[k].value) : std::string("NA"));
                table += '\n';
            }
        };
        emit("full_period", full);
        emit("mean_rolling", mean_roll);
        for (size_t s = 0; s < kSubsets.size(); ++s)
            if (full[s])
                for (size_t k = 0; k < kMetrics.size(); ++k)
                    if ((*full[s])[k].degenerate)
                        spdlog::warn("correlate: {} {} {} has constant ranks; reported as 0", spec.name,
                                     to_string(kSubsets[s]), to_string(kMetrics[k]));

        for (const auto& y : yearly_stats(pid[kOracleId]->records, daily)) {
            yearly += spec.name + ',' + std::to_string(y.year) + ',' + std::to_string(y.days);
            for (double v : {y.oracle, y.max, y.min, y.mean, y.std}) yearly += ',' + csv::format_double(v);
            yearly += '\n';
        }
    }
    csv::write_atomic(out.correlation_table(), table);
    csv::write_atomic(out.rolling_correlation(), rolling);
    csv::write_atomic(out.yearly_stats(), yearly);
    spdlog::info("correlate: tables written to {}", out.root.string());
}

void cmd_all(const RunConfig& cfg) {
    StageTimer timer{"all"};
    cmd_synth(cfg);
    cmd_forecast(cfg);
    cmd_backtest(cfg);
    cmd_evaluate(cfg);
    cmd_correlate(cfg);
}

}  // namespace fvalue
