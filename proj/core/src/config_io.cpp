#include <bsynth/config_io.hpp>

#include <bsynth/error.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace bsynth {

namespace {

nlohmann::json scalar_value(const YAML::Node& node) {
    const std::string& s = node.Scalar();
    if (node.Tag() == "!") return s;  // quoted
    if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
    if (s == "true" || s == "True" || s == "TRUE") return true;
    if (s == "false" || s == "False" || s == "FALSE") return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const bool numeric_start = std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '.' ||
                               (s[0] == '-' && s.size() > 1 && (std::isdigit(static_cast<unsigned char>(s[1])) || s[1] == '.'));
    if (numeric_start) {
        if (*first == '-') {
            std::int64_t v = 0;
            const auto [p, ec] = std::from_chars(first, last, v);
            if (ec == std::errc() && p == last) return v;
        } else {
            std::uint64_t v = 0;
            const auto [p, ec] = std::from_chars(first, last, v);
            if (ec == std::errc() && p == last) return v;
        }
        double d = 0.0;
        const auto [p, ec] = std::from_chars(first, last, d);
        if (ec == std::errc() && p == last) return d;
    }
    return s;
}

nlohmann::json to_json_value(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined: return nullptr;
        case YAML::NodeType::Scalar: return scalar_value(node);
        case YAML::NodeType::Sequence: {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& item : node) arr.push_back(to_json_value(item));
            return arr;
        }
        case YAML::NodeType::Map: {
            nlohmann::json obj = nlohmann::json::object();
            for (const auto& kv : node) {
                const std::string key = kv.first.as<std::string>();
                if (obj.contains(key)) throw ConfigError("duplicate key '" + key + "'");
                obj[key] = to_json_value(kv.second);
            }
            return obj;
        }
    }
    return nullptr;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

void reject_unknown(const nlohmann::json& j, const std::vector<std::string>& known, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

// nlohmann type errors carry no context; rethrow as ConfigError.
template <class F>
auto guarded(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

}  // namespace

nlohmann::json parse_structured_text(std::string_view text, const std::string& origin) {
    try {
        const YAML::Node root = YAML::Load(std::string(text));
        return to_json_value(root);
    } catch (const YAML::Exception& e) {
        throw ConfigError(origin + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
}

nlohmann::json load_structured_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_structured_text(buf.str(), path.string());
}

AnalystProgram load_analyst_program(const std::filesystem::path& path) {
    const nlohmann::json j = load_structured_file(path);
    return guarded(path.string(), [&] { return j.get<AnalystProgram>(); });
}

std::vector<Protocol> parse_protocol_choice(const std::string& choice) {
    if (choice == "once") return {Protocol::once};
    if (choice == "ten" || choice == "ten_by_ten") return {Protocol::ten_by_ten};
    if (choice == "both") return {Protocol::once, Protocol::ten_by_ten};
    throw ConfigError("protocol must be once, ten or both (got '" + choice + "')");
}

std::vector<SynthesisMode> parse_synthesis_choice(const std::string& choice) {
    if (choice == "bayes" || choice == "bayesian") return {SynthesisMode::bayesian};
    if (choice == "convex") return {SynthesisMode::convex};
    if (choice == "both") return {SynthesisMode::bayesian, SynthesisMode::convex};
    throw ConfigError("synthesis must be bayes, convex or both (got '" + choice + "')");
}

void RunConfig::validate() const {
    if (k < 2) throw ConfigError("k must be >= 2 (got " + std::to_string(k) + ")");
    if (data.empty()) throw ConfigError("no data file given");
    if (data_format != "ozone" && data_format != "numeric") {
        throw ConfigError("data_format must be ozone or numeric");
    }
    if (protocols.empty()) throw ConfigError("no protocols selected");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (analysts.size() != k) {
        throw ConfigError(std::to_string(analysts.size()) + " analyst programs for k = " + std::to_string(k));
    }
    for (auto t : test_splits) {
        if (t >= k) throw ConfigError("test split " + std::to_string(t + 1) + " out of range");
    }
    for (const auto& a : analysts) a.validate();
}

RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("run config must be a mapping");
    reject_unknown(j,
                   {"data", "data_format", "k", "seed", "stratum", "test_splits", "protocol", "synthesis",
                    "convex_weights", "batch_size", "baselines", "baseline_candidates", "response", "analysts", "out",
                    "format"},
                   "run config");
    return guarded("run config", [&] {
        RunConfig c;
        if (j.contains("data")) c.data = resolve(base_dir, j.at("data").get<std::string>());
        c.data_format = j.value("data_format", c.data_format);
        if (j.contains("k")) {
            const auto& kv = j.at("k");
            if (!kv.is_number_integer() || kv.get<std::int64_t>() < 0) throw ConfigError("k must be a nonnegative integer");
            c.k = kv.get<std::size_t>();
        }
        if (j.contains("seed")) {
            const auto& s = j.at("seed");
            if (!s.is_number_integer()) throw ConfigError("seed must be an integer");
            c.seed = s.is_number_unsigned() ? s.get<std::uint64_t>() : static_cast<std::uint64_t>(s.get<std::int64_t>());
        }
        if (j.contains("stratum") && !j.at("stratum").is_null()) c.stratum = j.at("stratum").get<std::string>();
        if (j.contains("test_splits")) {
            for (const auto& t : j.at("test_splits")) {
                const auto v = t.get<std::int64_t>();
                if (v < 1) throw ConfigError("test_splits are 1-based");
                c.test_splits.push_back(static_cast<std::size_t>(v - 1));
            }
        }
        if (j.contains("protocol")) c.protocols = parse_protocol_choice(j.at("protocol").get<std::string>());
        if (j.contains("synthesis")) c.synthesis = parse_synthesis_choice(j.at("synthesis").get<std::string>());
        if (j.contains("convex_weights") && !j.at("convex_weights").is_null()) {
            c.convex_weights = j.at("convex_weights").get<std::vector<double>>();
        }
        c.batch_size = j.value("batch_size", c.batch_size);
        c.baselines = j.value("baselines", c.baselines);
        if (j.contains("baseline_candidates")) {
            c.baseline_candidates = j.at("baseline_candidates").get<std::vector<FeatureTransform>>();
        }
        if (j.contains("response")) {
            c.response.column = j.at("response").value("column", c.response.column);
            c.response.log = j.at("response").value("log", c.response.log);
        }
        if (j.contains("analysts")) {
            for (const auto& a : j.at("analysts")) {
                if (a.is_string()) {
                    c.analysts.push_back(load_analyst_program(resolve(base_dir, a.get<std::string>())));
                } else {
                    c.analysts.push_back(a.get<AnalystProgram>());
                }
            }
        }
        if (j.contains("out")) c.out = resolve(base_dir, j.at("out").get<std::string>());
        if (j.contains("format")) {
            const auto f = j.at("format").get<std::string>();
            if (f != "text" && f != "json" && f != "both") throw ConfigError("format must be text, json or both");
            c.write_text = f != "json";
            c.write_json = f != "text";
        }
        return c;
    });
}

RunConfig load_run_config(const std::filesystem::path& path) {
    const nlohmann::json j = load_structured_file(path);
    return parse_run_config(j, path.parent_path());
}

}  // namespace bsynth
