#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include <bsynth/analysts.hpp>
#include <bsynth/experiment.hpp>

namespace bsynth {

/// Parse YAML (JSON is accepted as a YAML subset) into a JSON value.
/// Unquoted scalars become null, booleans, integers or reals when they read
/// as such; quoted scalars stay strings. Throws ConfigError.
nlohmann::json parse_structured_text(std::string_view text, const std::string& origin = "<text>");
nlohmann::json load_structured_file(const std::filesystem::path& path);

struct RunConfig {
    std::filesystem::path data;
    /// "ozone" validates the ten-column schema; "numeric" accepts any
    /// all-numeric CSV.
    std::string data_format = "ozone";
    std::size_t k = 3;
    std::uint64_t seed = 7;
    std::optional<std::string> stratum;
    std::vector<std::size_t> test_splits;  // 1-based in the file, stored 0-based
    std::vector<Protocol> protocols{Protocol::once, Protocol::ten_by_ten};
    std::vector<SynthesisMode> synthesis{SynthesisMode::bayesian, SynthesisMode::convex};
    std::optional<std::vector<double>> convex_weights;
    std::size_t batch_size = 10;
    bool baselines = true;
    std::vector<FeatureTransform> baseline_candidates;
    ResponseSpec response;
    std::vector<AnalystProgram> analysts;
    std::filesystem::path out = "out";
    bool write_text = true;
    bool write_json = true;

    void validate() const;
};

/// Relative paths in the config resolve against `base_dir`. Only types and
/// choices are checked here; call validate() once command-line overrides
/// have been applied.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

AnalystProgram load_analyst_program(const std::filesystem::path& path);

std::vector<Protocol> parse_protocol_choice(const std::string& choice);       // once | ten | both
std::vector<SynthesisMode> parse_synthesis_choice(const std::string& choice);  // bayes | convex | both

}  // namespace bsynth
