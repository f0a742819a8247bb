#pragma once

#include "fvalue/bess.hpp"
#include "fvalue/forecast.hpp"
#include "fvalue/ingest.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fvalue {

struct DataConfig {
    enum class Source { Synth, Csv } source = Source::Synth;
    int days = 400;
    SynthProfile profile = SynthProfile::Duck;
    Date start = Date{std::chrono::year{2021} / 1 / 1};
    std::filesystem::path hourly;  // csv source only
    std::filesystem::path daily;
};

struct EvaluationConfig {
    std::optional<Date> first;
    std::optional<Date> last;
    int days = 0;  // when first/last are absent: the trailing `days` days of the dataset
};

struct AnalysisConfig {
    int rolling_window = 365;
    int stride = 1;
    bool centered_covariance = false;
};

/// One run: everything that determines the outputs.
struct RunConfig {
    std::uint64_t seed = 42;
    std::filesystem::path out = "out";
    unsigned threads = 0;
    DataConfig data;
    EvaluationConfig evaluation;
    PoolConfig pool;
    ModelSettings models;
    std::vector<BessSpec> bess;
    AnalysisConfig analysis;

    /// Merged configuration tree, serialised deterministically; hashed into the manifest.
    std::string canonical;
    /// Raw text of the user file, used for line lookups in later validation errors.
    std::string source_text;
    std::string source_name;

    /// Line of a dotted field path in the user file, 0 when it came from the preset.
    int line_of(std::string_view dotted) const;
    /// ValidationError prefixed with the file position of `dotted`.
    [[noreturn]] void fail(std::string_view dotted, const std::string& message) const;
};

struct ConfigOverrides {
    std::optional<std::filesystem::path> config;
    std::string preset = "desk";
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
};

/// Names of the built-in presets.
std::vector<std::string> preset_names();
/// Preset as a JSON document.
std::string preset_json(const std::string& name);

/// Preset, then the user file merged over it, then command-line overrides.
RunConfig load_config(const ConfigOverrides& ov);
RunConfig parse_config(const std::string& text, const std::string& source_name,
                       const std::string& preset = "desk");

/// Evaluation day range on `ds`; checks the history needed by the widest window.
struct EvalRange {
    Date first;
    Date last;
};
EvalRange resolve_evaluation(const RunConfig& cfg, const MarketDataset& ds);

}  // namespace fvalue
