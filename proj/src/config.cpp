#include "fvalue/config.hpp"

#include "fvalue/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace fvalue {

using nlohmann::json;

namespace {

const char* kDeskPreset = R"({
  "seed": 42,
  "out": "out",
  "threads": 0,
  "data": {"source": "synth", "days": 400, "profile": "duck", "start": "2021-01-01"},
  "evaluation": {"days": 160},
  "pool": {
    "members": [
      {"family": "ARX",  "depvar": "direct",    "vst": false, "estimator": "het"},
      {"family": "ARX",  "depvar": "deviation", "vst": true,  "estimator": "het"},
      {"family": "ARX",  "depvar": "direct",    "vst": true,  "estimator": "pooled"},
      {"family": "LEAR", "depvar": "direct",    "vst": false, "estimator": "het"},
      {"family": "LEAR", "depvar": "deviation", "vst": true,  "estimator": "pooled"},
      {"family": "NARX", "depvar": "direct",    "vst": false, "estimator": "het"},
      {"family": "NARX", "depvar": "deviation", "vst": true,  "estimator": "het"},
      {"family": "NARX", "depvar": "direct",    "vst": true,  "estimator": "pooled"}
    ],
    "windows": [28, 56, 112],
    "averages": true
  },
  "models": {"committee_size": 2, "max_epochs": 1000, "lambda_count": 100, "lambda_ratio": 0.0001},
  "bess": [
    {"name": "BESS-a", "energy": 3, "power": 3, "block": 1, "eta_charge": 0.98, "eta_discharge": 0.97, "cost": 11.63},
    {"name": "BESS-b", "energy": 3, "power": 1, "block": 3, "eta_charge": 0.98, "eta_discharge": 0.97, "cost": 11.63}
  ],
  "analysis": {"rolling_window": 91, "stride": 7, "centered_covariance": false}
})";

const char* kFullPreset = R"({
  "seed": 42,
  "out": "out",
  "threads": 0,
  "data": {"source": "synth", "days": 2200, "profile": "duck", "start": "2015-01-01"},
  "evaluation": {"days": 730},
  "pool": {
    "families": ["ARX", "NARX", "LEAR"],
    "depvars": ["direct", "deviation"],
    "vst": [false, true],
    "estimators": ["het", "pooled"],
    "windows": [56, 84, 112, 182, 365, 730, 1460],
    "averages": true
  },
  "models": {"committee_size": 10, "max_epochs": 1000, "lambda_count": 100, "lambda_ratio": 0.0001},
  "bess": [
    {"name": "BESS-a", "energy": 3, "power": 3, "block": 1, "eta_charge": 0.98, "eta_discharge": 0.97, "cost": 11.63},
    {"name": "BESS-b", "energy": 3, "power": 1, "block": 3, "eta_charge": 0.98, "eta_discharge": 0.97, "cost": 11.63}
  ],
  "analysis": {"rolling_window": 365, "stride": 1, "centered_covariance": false}
})";

// Output location and thread count do not change results, so they stay out of the hash.
std::string canonical_text(json root) {
    root.erase("out");
    root.erase("threads");
    return root.dump(2);
}

int line_at(const std::string& text, size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

std::vector<std::string> split_dotted(std::string_view dotted) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (true) {
        const size_t pos = dotted.find('.', start);
        parts.emplace_back(dotted.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

// Walks the typed tree while recording the dotted path for error messages.
class Reader {
public:
    explicit Reader(const RunConfig& cfg) : cfg_(cfg) {}

    const json& at(const json& node, const std::string& key, const std::string& path) const {
        if (!node.contains(key)) cfg_.fail(path, "missing required field '" + path + "'");
        return node.at(key);
    }

    template <typename T>
    T get(const json& node, const std::string& path, const char* what) const {
        try {
            return node.get<T>();
        } catch (const json::exception&) {
            cfg_.fail(path, "field '" + path + "' must be " + what);
        }
    }

    void only_keys(const json& node, const std::string& path, std::set<std::string> allowed) const {
        if (!node.is_object()) cfg_.fail(path, "field '" + path + "' must be an object");
        for (const auto& [k, v] : node.items())
            if (!allowed.count(k)) {
                const std::string full = path.empty() ? k : path + "." + k;
                cfg_.fail(full, "unknown field '" + full + "'");
            }
    }

    template <typename F>
    auto parse(const std::string& path, F&& fn) const {
        try {
            return fn();
        } catch (const ValidationError& e) {
            if (!cfg_.source_name.empty() && std::string_view(e.what()).starts_with(cfg_.source_name)) throw;
            cfg_.fail(path, "field '" + path + "': " + e.what());
        }
    }

private:
    const RunConfig& cfg_;
};

ForecastSpec parse_base(const Reader& r, const json& node, const std::string& path) {
    r.only_keys(node, path, {"family", "depvar", "vst", "estimator"});
    ForecastSpec s;
    s.family = r.parse(path + ".family", [&] {
        return parse_family(r.get<std::string>(r.at(node, "family", path + ".family"), path + ".family", "a string"));
    });
    s.depvar = r.parse(path + ".depvar", [&] {
        return parse_depvar(r.get<std::string>(r.at(node, "depvar", path + ".depvar"), path + ".depvar", "a string"));
    });
    s.vst = r.get<bool>(r.at(node, "vst", path + ".vst"), path + ".vst", "a boolean");
    s.estimator = r.parse(path + ".estimator", [&] {
        return parse_estimator(
            r.get<std::string>(r.at(node, "estimator", path + ".estimator"), path + ".estimator", "a string"));
    });
    return s;
}

void build(RunConfig& cfg, const json& root) {
    const Reader r(cfg);
    r.only_keys(root, "", {"seed", "out", "threads", "data", "evaluation", "pool", "models", "bess", "analysis"});

    cfg.seed = r.get<std::uint64_t>(r.at(root, "seed", "seed"), "seed", "a non-negative integer");
    cfg.out = r.get<std::string>(r.at(root, "out", "out"), "out", "a string");
    {
        const auto t = r.get<long>(r.at(root, "threads", "threads"), "threads", "an integer");
        if (t < 0) cfg.fail("threads", "field 'threads' must be >= 0");
        cfg.threads = static_cast<unsigned>(t);
    }

    const json& data = r.at(root, "data", "data");
    r.only_keys(data, "data", {"source", "days", "profile", "start", "hourly", "daily"});
    const auto source = r.get<std::string>(r.at(data, "source", "data.source"), "data.source", "a string");
    if (source == "synth") {
        cfg.data.source = DataConfig::Source::Synth;
        cfg.data.days = r.get<int>(r.at(data, "days", "data.days"), "data.days", "an integer");
        if (cfg.data.days < 15) cfg.fail("data.days", "field 'data.days' must be at least 15");
        cfg.data.profile = r.parse("data.profile", [&] {
            return parse_profile(r.get<std::string>(r.at(data, "profile", "data.profile"), "data.profile", "a string"));
        });
        if (data.contains("start"))
            cfg.data.start = r.parse("data.start", [&] {
                return parse_date(r.get<std::string>(data.at("start"), "data.start", "a date string"));
            });
    } else if (source == "csv") {
        cfg.data.source = DataConfig::Source::Csv;
        const auto base = cfg.source_name.empty() ? std::filesystem::path{}
                                                  : std::filesystem::path(cfg.source_name).parent_path();
        auto resolve = [&](const char* key) {
            const std::string path = std::string("data.") + key;
            std::filesystem::path p = r.get<std::string>(r.at(data, key, path), path, "a path string");
            if (p.is_relative()) p = base / p;
            if (!std::filesystem::exists(p)) cfg.fail(path, "field '" + path + "': file '" + p.string() + "' does not exist");
            return p;
        };
        cfg.data.hourly = resolve("hourly");
        cfg.data.daily = resolve("daily");
    } else {
        cfg.fail("data.source", "field 'data.source' must be \"synth\" or \"csv\"");
    }

    const json& ev = r.at(root, "evaluation", "evaluation");
    r.only_keys(ev, "evaluation", {"days", "first", "last"});
    if (ev.contains("first") || ev.contains("last")) {
        if (!ev.contains("first") || !ev.contains("last"))
            cfg.fail("evaluation", "field 'evaluation' needs both 'first' and 'last'");
        cfg.evaluation.first = r.parse("evaluation.first", [&] {
            return parse_date(r.get<std::string>(ev.at("first"), "evaluation.first", "a date string"));
        });
        cfg.evaluation.last = r.parse("evaluation.last", [&] {
            return parse_date(r.get<std::string>(ev.at("last"), "evaluation.last", "a date string"));
        });
        if (*cfg.evaluation.last < *cfg.evaluation.first)
            cfg.fail("evaluation.last", "field 'evaluation.last' precedes 'evaluation.first'");
    } else {
        cfg.evaluation.days = r.get<int>(r.at(ev, "days", "evaluation.days"), "evaluation.days", "an integer");
        if (cfg.evaluation.days < 1) cfg.fail("evaluation.days", "field 'evaluation.days' must be positive");
    }

    const json& pool = r.at(root, "pool", "pool");
    r.only_keys(pool, "pool", {"families", "depvars", "vst", "estimators", "windows", "averages", "members"});
    auto strings = [&](const char* key, auto parser, auto& target) {
        if (!pool.contains(key)) return;
        const std::string path = std::string("pool.") + key;
        target.clear();
        for (const auto& s : r.get<std::vector<std::string>>(pool.at(key), path, "a list of strings"))
            target.push_back(r.parse(path, [&] { return parser(s); }));
        if (target.empty()) cfg.fail(path, "field '" + path + "' selects no members");
    };
    strings("families", parse_family, cfg.pool.families);
    strings("depvars", parse_depvar, cfg.pool.depvars);
    strings("estimators", parse_estimator, cfg.pool.estimators);
    if (pool.contains("vst")) {
        cfg.pool.vst = r.get<std::vector<bool>>(pool.at("vst"), "pool.vst", "a list of booleans");
        if (cfg.pool.vst.empty()) cfg.fail("pool.vst", "field 'pool.vst' selects no members");
    }
    cfg.pool.windows = r.get<std::vector<int>>(r.at(pool, "windows", "pool.windows"), "pool.windows",
                                               "a list of integers");
    if (cfg.pool.windows.empty()) cfg.fail("pool.windows", "field 'pool.windows' selects no members");
    for (int w : cfg.pool.windows)
        if (w < 2) cfg.fail("pool.windows", "field 'pool.windows' has a window shorter than 2 days");
    if (std::set<int>(cfg.pool.windows.begin(), cfg.pool.windows.end()).size() != cfg.pool.windows.size())
        cfg.fail("pool.windows", "field 'pool.windows' lists a window twice");
    if (pool.contains("averages"))
        cfg.pool.include_averages = r.get<bool>(pool.at("averages"), "pool.averages", "a boolean");
    if (pool.contains("members")) {
        const json& ms = pool.at("members");
        if (!ms.is_array() || ms.empty()) cfg.fail("pool.members", "field 'pool.members' must be a non-empty list");
        for (size_t i = 0; i < ms.size(); ++i) {
            const auto s = parse_base(r, ms[i], "pool.members");
            if (std::find(cfg.pool.base_specs.begin(), cfg.pool.base_specs.end(), s) != cfg.pool.base_specs.end())
                cfg.fail("pool.members", "field 'pool.members' lists " + s.id() + " twice");
            cfg.pool.base_specs.push_back(s);
        }
    }

    const json& models = r.at(root, "models", "models");
    r.only_keys(models, "models", {"committee_size", "max_epochs", "lambda_count", "lambda_ratio", "mad_consistency"});
    cfg.models.lm.committee_size =
        r.get<int>(r.at(models, "committee_size", "models.committee_size"), "models.committee_size", "an integer");
    if (cfg.models.lm.committee_size < 1)
        cfg.fail("models.committee_size", "field 'models.committee_size' must be positive");
    cfg.models.lm.max_epochs =
        r.get<int>(r.at(models, "max_epochs", "models.max_epochs"), "models.max_epochs", "an integer");
    if (cfg.models.lm.max_epochs < 1) cfg.fail("models.max_epochs", "field 'models.max_epochs' must be positive");
    cfg.models.lambda_count =
        r.get<int>(r.at(models, "lambda_count", "models.lambda_count"), "models.lambda_count", "an integer");
    if (cfg.models.lambda_count < 2) cfg.fail("models.lambda_count", "field 'models.lambda_count' must be >= 2");
    cfg.models.lambda_ratio =
        r.get<double>(r.at(models, "lambda_ratio", "models.lambda_ratio"), "models.lambda_ratio", "a number");
    if (!(cfg.models.lambda_ratio > 0.0 && cfg.models.lambda_ratio < 1.0))
        cfg.fail("models.lambda_ratio", "field 'models.lambda_ratio' must lie in (0, 1)");
    if (models.contains("mad_consistency"))
        cfg.models.vst.mad_consistency =
            r.get<bool>(models.at("mad_consistency"), "models.mad_consistency", "a boolean");
    cfg.models.seed = cfg.seed;

    const json& bess = r.at(root, "bess", "bess");
    if (!bess.is_array() || bess.empty()) cfg.fail("bess", "field 'bess' must be a non-empty list");
    std::set<std::string> names;
    for (const auto& b : bess) {
        r.only_keys(b, "bess", {"name", "energy", "power", "block", "eta_charge", "eta_discharge", "cost"});
        BessSpec s;
        s.name = r.get<std::string>(r.at(b, "name", "bess.name"), "bess.name", "a string");
        if (s.name.empty() || s.name.find_first_of("/\\ ,") != std::string::npos)
            cfg.fail("bess.name", "field 'bess.name' must be a non-empty token without spaces, commas or slashes");
        if (!names.insert(s.name).second) cfg.fail("bess.name", "field 'bess.name' repeats '" + s.name + "'");
        s.energy = r.get<double>(r.at(b, "energy", "bess.energy"), "bess.energy", "a number");
        s.power = r.get<double>(r.at(b, "power", "bess.power"), "bess.power", "a number");
        s.block = r.get<int>(r.at(b, "block", "bess.block"), "bess.block", "an integer");
        s.eta_charge = r.get<double>(r.at(b, "eta_charge", "bess.eta_charge"), "bess.eta_charge", "a number");
        s.eta_discharge =
            r.get<double>(r.at(b, "eta_discharge", "bess.eta_discharge"), "bess.eta_discharge", "a number");
        s.cost = r.get<double>(r.at(b, "cost", "bess.cost"), "bess.cost", "a number");
        r.parse("bess", [&] { s.validate(); return 0; });
        cfg.bess.push_back(s);
    }

    const json& an = r.at(root, "analysis", "analysis");
    r.only_keys(an, "analysis", {"rolling_window", "stride", "centered_covariance"});
    cfg.analysis.rolling_window =
        r.get<int>(r.at(an, "rolling_window", "analysis.rolling_window"), "analysis.rolling_window", "an integer");
    if (cfg.analysis.rolling_window < 2)
        cfg.fail("analysis.rolling_window", "field 'analysis.rolling_window' must be at least 2");
    cfg.analysis.stride = r.get<int>(r.at(an, "stride", "analysis.stride"), "analysis.stride", "an integer");
    if (cfg.analysis.stride < 1) cfg.fail("analysis.stride", "field 'analysis.stride' must be positive");
    if (an.contains("centered_covariance"))
        cfg.analysis.centered_covariance =
            r.get<bool>(an.at("centered_covariance"), "analysis.centered_covariance", "a boolean");

    if (cfg.pool.members().empty()) cfg.fail("pool", "field 'pool' selects no members");

    // Synthetic data has a known length, so the history check can run up front.
    if (cfg.data.source == DataConfig::Source::Synth) {
        const int need = cfg.pool.max_window() + static_cast<int>(kMaxLagDays);
        if (!cfg.evaluation.first) {
            if (cfg.evaluation.days > cfg.data.days)
                cfg.fail("evaluation.days", "field 'evaluation.days' exceeds 'data.days'");
            const int available = cfg.data.days - cfg.evaluation.days;
            if (available < need)
                cfg.fail("pool.windows", "field 'pool.windows': window " + std::to_string(cfg.pool.max_window()) +
                                             " needs " + std::to_string(need) +
                                             " days of history before the evaluation period, only " +
                                             std::to_string(available) + " available");
            if (cfg.analysis.rolling_window > cfg.evaluation.days)
                cfg.fail("analysis.rolling_window",
                         "field 'analysis.rolling_window' exceeds the evaluation period of " +
                             std::to_string(cfg.evaluation.days) + " days");
        }
    }
}

}  // namespace

int RunConfig::line_of(std::string_view dotted) const {
    if (source_text.empty()) return 0;
    size_t pos = 0;
    for (const auto& part : split_dotted(dotted)) {
        if (part.empty()) continue;
        const size_t found = source_text.find("\"" + part + "\"", pos);
        if (found == std::string::npos) return 0;
        pos = found + 1;
    }
    return pos == 0 ? 0 : line_at(source_text, pos);
}

void RunConfig::fail(std::string_view dotted, const std::string& message) const {
    const int line = line_of(dotted);
    const std::string where = source_name.empty() ? std::string("config") : source_name;
    if (line > 0) throw ValidationError(where + ":" + std::to_string(line) + ": " + message);
    throw ValidationError(where + " (preset value): " + message);
}

std::vector<std::string> preset_names() { return {"desk", "full"}; }

std::string preset_json(const std::string& name) {
    if (name == "desk") return kDeskPreset;
    if (name == "full") return kFullPreset;
    throw ValidationError("unknown preset '" + name + "' (expected desk or full)");
}

RunConfig parse_config(const std::string& text, const std::string& source_name, const std::string& preset) {
    RunConfig cfg;
    cfg.source_name = source_name;
    json root = json::parse(preset_json(preset));
    if (!text.empty()) {
        cfg.source_text = text;
        json user;
        try {
            user = json::parse(text, nullptr, true, true);
        } catch (const json::parse_error& e) {
            throw ValidationError(source_name + ":" + std::to_string(line_at(text, e.byte == 0 ? 0 : e.byte - 1)) +
                                  ": malformed configuration: " + e.what());
        }
        if (!user.is_object()) throw ValidationError(source_name + ":1: configuration must be a JSON object");
        // Lists replace preset lists wholesale; members in particular are not merged by index.
        if (user.contains("pool") && user["pool"].is_object() &&
            (user["pool"].contains("families") || user["pool"].contains("depvars") ||
             user["pool"].contains("vst") || user["pool"].contains("estimators")) &&
            !user["pool"].contains("members"))
            root["pool"].erase("members");
        root.merge_patch(user);
    }
    build(cfg, root);
    cfg.canonical = canonical_text(root);
    return cfg;
}

RunConfig load_config(const ConfigOverrides& ov) {
    std::string text;
    std::string name;
    if (ov.config) {
        text = read_text(*ov.config);
        name = ov.config->string();
    }
    RunConfig cfg = parse_config(text, name, ov.preset);
    if (ov.seed || ov.out) {
        json root = json::parse(cfg.canonical);
        root["out"] = cfg.out.string();
        root["threads"] = cfg.threads;
        if (ov.seed) root["seed"] = *ov.seed;
        if (ov.out) root["out"] = ov.out->string();
        RunConfig patched;
        patched.source_text = cfg.source_text;
        patched.source_name = cfg.source_name;
        build(patched, root);
        patched.canonical = canonical_text(root);
        return patched;
    }
    return cfg;
}

EvalRange resolve_evaluation(const RunConfig& cfg, const MarketDataset& ds) {
    if (ds.days() == 0) throw ValidationError("dataset is empty");
    EvalRange r;
    size_t i0 = 0;
    if (cfg.evaluation.first) {
        r.first = *cfg.evaluation.first;
        r.last = *cfg.evaluation.last;
        if (r.first < ds.dates.front() || r.last > ds.dates.back())
            cfg.fail("evaluation.first", "field 'evaluation' range " + format_date(r.first) + ".." +
                                             format_date(r.last) + " lies outside the data " +
                                             format_date(ds.dates.front()) + ".." + format_date(ds.dates.back()));
        i0 = ds.index_of(r.first);
    } else {
        if (static_cast<size_t>(cfg.evaluation.days) > ds.days())
            cfg.fail("evaluation.days", "field 'evaluation.days' exceeds the " + std::to_string(ds.days()) +
                                            " days of data");
        i0 = ds.days() - static_cast<size_t>(cfg.evaluation.days);
        r.first = ds.dates[i0];
        r.last = ds.dates.back();
    }
    const size_t need = static_cast<size_t>(cfg.pool.max_window()) + kMaxLagDays;
    if (i0 < need)
        cfg.fail("pool.windows", "field 'pool.windows': window " + std::to_string(cfg.pool.max_window()) + " needs " +
                                     std::to_string(need) + " days of history before the evaluation period, only " +
                                     std::to_string(i0) + " available");
    const auto eval_days = (r.last - r.first).count() + 1;
    if (cfg.analysis.rolling_window > eval_days)
        cfg.fail("analysis.rolling_window", "field 'analysis.rolling_window' exceeds the evaluation period of " +
                                                std::to_string(eval_days) + " days");
    return r;
}

}  // namespace fvalue
