#include "fvalue/pipeline.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <functional>
#include <iostream>
#include <map>

int main(int argc, char** argv) {
    using namespace fvalue;

    CLI::App app{"Forecast-value evaluation for day-ahead electricity markets"};
    app.require_subcommand(1, 1);

    ConfigOverrides ov;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool verbose = false;

    const std::map<std::string, std::pair<std::string, std::function<void(const RunConfig&)>>> commands{
        {"synth", {"Generate the synthetic market", cmd_synth}},
        {"forecast", {"Forecast every pool member", cmd_forecast}},
        {"backtest", {"Backtest the BESS strategy per spec, oracle included", cmd_backtest}},
        {"evaluate", {"Compute forecast-quality metrics", cmd_evaluate}},
        {"correlate", {"Correlation tables, rolling series and yearly statistics", cmd_correlate}},
        {"all", {"Run every stage in order", cmd_all}},
    };

    std::vector<CLI::App*> subs;
    for (const auto& [name, entry] : commands) {
        auto* sub = app.add_subcommand(name, entry.first);
        sub->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--seed", seed, "Master seed");
        sub->add_option("--preset", ov.preset, "Base preset")->check(CLI::IsMember({"desk", "full"}));
        sub->add_flag("-v,--verbose", verbose, "Debug logging");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
    try {
        for (auto* sub : subs) {
            if (!sub->parsed()) continue;
            if (!config_path.empty()) ov.config = config_path;
            if (sub->count("--seed")) ov.seed = seed;
            if (!out_dir.empty()) ov.out = out_dir;
            const RunConfig cfg = load_config(ov);
            commands.at(sub->get_name()).second(cfg);
        }
    } catch (const ValidationError& e) {
        spdlog::error("{}", e.what());
        return 1;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return 0;
}
