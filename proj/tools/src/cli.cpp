#include <bsynth_cli/cli.hpp>

#include <bsynth/config_io.hpp>
#include <bsynth/data.hpp>
#include <bsynth/diagnostics.hpp>
#include <bsynth/error.hpp>
#include <bsynth/experiment.hpp>
#include <bsynth/report.hpp>
#include <bsynth/rng.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace bsynth::cli {

namespace fs = std::filesystem;

namespace {

struct Flags {
    std::string config;
    std::string data;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> k;
    std::string protocol;
    std::string synthesis;
    std::string out;
    std::string format;
    std::string stratum;
    std::size_t n = 330;
    std::uint64_t sim_seed = 7;
};

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    f << text;
    if (!f) throw ConfigError("failed writing '" + path.string() + "'");
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_file(path, j.dump(2) + "\n"); }

// Config file (when given) with command-line overrides applied.
RunConfig resolve_config(const Flags& f, bool need_analysts) {
    RunConfig c;
    if (!f.config.empty()) {
        c = load_run_config(f.config);
    } else if (need_analysts) {
        throw ConfigError("--config is required (it names the analyst programs)");
    }
    if (!f.data.empty()) c.data = f.data;
    if (f.seed) c.seed = *f.seed;
    if (f.k) c.k = *f.k;
    if (!f.protocol.empty()) c.protocols = parse_protocol_choice(f.protocol);
    if (!f.synthesis.empty()) c.synthesis = parse_synthesis_choice(f.synthesis);
    if (!f.out.empty()) c.out = f.out;
    if (!f.stratum.empty()) c.stratum = f.stratum;
    if (!f.format.empty()) {
        if (f.format != "text" && f.format != "json" && f.format != "both") {
            throw ConfigError("--format must be text, json or both");
        }
        c.write_text = f.format != "json";
        c.write_json = f.format != "text";
    }
    if (c.k < 2) throw ConfigError("k must be >= 2 (got " + std::to_string(c.k) + ")");
    if (c.data.empty()) throw ConfigError("no data file: pass --data or set data in the config");
    return c;
}

Dataset load_data(const RunConfig& c) {
    if (!fs::exists(c.data)) throw DataError("data file not found: '" + c.data.string() + "'");
    return c.data_format == "numeric" ? load_numeric_csv(c.data) : load_ozone_csv(c.data);
}

SplitAssignment make_split(const RunConfig& c, const Dataset& data) {
    const std::uint64_t s = derive_seed(c.seed, "split");
    return c.stratum ? split_stratified(data, c.k, s, *c.stratum) : split_random(data, c.k, s);
}

int cmd_split(const Flags& f, std::ostream& out) {
    const RunConfig c = resolve_config(f, false);
    const Dataset data = load_data(c);
    const SplitAssignment split = make_split(c, data);
    const fs::path path = c.out / "split.json";
    write_json(path, split);
    out << "wrote " << path.string() << " (k = " << split.k << ", sizes";
    for (const auto& p : split.parts) out << ' ' << p.size();
    out << ")\n";
    return kSuccess;
}

int cmd_run(const Flags& f, std::ostream& out) {
    RunConfig c = resolve_config(f, true);
    c.validate();
    const Dataset data = load_data(c);

    ExperimentPlan plan;
    plan.seed = c.seed;
    plan.split = make_split(c, data);
    plan.test_splits = c.test_splits;
    plan.protocols = c.protocols;
    plan.synthesis_modes = c.synthesis;
    plan.batch_size = c.batch_size;
    plan.baselines = c.baselines;
    plan.baseline_candidates = c.baseline_candidates;
    plan.response = c.response;
    plan.convex_weights = c.convex_weights;

    const ExperimentResult result = run_experiment(plan, c.analysts, data);

    write_json(c.out / "split.json", plan.split);
    for (std::size_t t : plan.selected_test_splits()) {
        if (std::find(c.protocols.begin(), c.protocols.end(), Protocol::ten_by_ten) != c.protocols.end()) {
            write_json(c.out / "schedules" / ("split-" + std::to_string(t + 1) + ".json"), plan.schedule(t));
        }
    }
    // Tables are rendered from the serialized report so text and JSON agree.
    const nlohmann::json report_json = result.report;
    const MetricsReport reloaded = report_json.get<MetricsReport>();
    if (c.write_json) {
        nlohmann::json programs = nlohmann::json::array();
        for (const auto& p : c.analysts) programs.push_back(seeded_program(p, c.seed));
        write_json(c.out / "run.json", {{"seed", c.seed},
                                        {"k", c.k},
                                        {"data_rows", data.rows()},
                                        {"protocols", [&] {
                                             nlohmann::json a = nlohmann::json::array();
                                             for (auto p : c.protocols) a.push_back(to_string(p));
                                             return a;
                                         }()},
                                        {"analysts", programs}});
        write_json(c.out / "metrics.json", report_json);
        for (const auto& cell : result.cells) {
            const std::string split_no = std::to_string(cell.test_split + 1);
            const std::string protocol = to_string(cell.protocol);
            nlohmann::json j = cell;
            nlohmann::json recs = nlohmann::json::array();
            for (const auto& r : result.report.records) {
                if (r.split == cell.test_split + 1 && r.protocol == protocol) recs.push_back(r);
            }
            j["records"] = std::move(recs);
            nlohmann::json trs = nlohmann::json::array();
            for (const auto& tr : result.report.trajectories) {
                if (tr.split == cell.test_split + 1 && cell.protocol == Protocol::ten_by_ten) {
                    trs.push_back({{"method", tr.method}, {"trajectory", tr.trajectory}});
                }
            }
            j["trajectories"] = std::move(trs);
            write_json(c.out / "cells" / ("split-" + split_no + "-" + protocol + ".json"), j);
        }
    }
    if (c.write_text) {
        const std::string tables = render_tables(reloaded);
        write_file(c.out / "tables.txt", tables);
        out << tables;
    }
    return kSuccess;
}

int cmd_report(const std::string& dir, std::ostream& out) {
    const fs::path metrics = fs::path(dir) / "metrics.json";
    if (!fs::exists(metrics)) throw DataError("no artifacts in '" + dir + "' (metrics.json not found)");
    std::ifstream in(metrics);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("cannot parse '" + metrics.string() + "': " + e.what());
    }
    MetricsReport report;
    try {
        report = j.get<MetricsReport>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed report '" + metrics.string() + "': " + e.what());
    }
    if (report.records.empty()) throw DataError("no artifacts in '" + dir + "' (report has no records)");
    out << render_tables(report);
    return kSuccess;
}

int cmd_simulate(const Flags& f, std::ostream& out) {
    if (f.out.empty()) throw ConfigError("simulate needs --out FILE");
    if (f.n < 1) throw ConfigError("--n must be >= 1");
    const Dataset data = synthetic_ozone(f.n, f.sim_seed);
    std::ostringstream csv;
    write_csv(data, csv);
    write_file(f.out, csv.str());
    out << "wrote " << data.rows() << " synthetic rows to " << f.out << "\n";
    return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayesian and convex synthesis of split-data regression analyses"};
    app.require_subcommand(1);
    Flags f;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "Run configuration (YAML or JSON)");
        sub->add_option("--data", f.data, "Data CSV; overrides the config");
        sub->add_option("--seed", f.seed, "Master seed");
        sub->add_option("--k", f.k, "Number of splits");
        sub->add_option("--out", f.out, "Output directory");
        sub->add_option("--stratum", f.stratum, "Column to stratify the split on");
    };
    auto* split = app.add_subcommand("split", "Write the seeded split assignment");
    common(split);
    auto* run_cmd = app.add_subcommand("run", "Train analysts, synthesize, evaluate and report");
    common(run_cmd);
    run_cmd->add_option("--protocol", f.protocol, "once|ten|both");
    run_cmd->add_option("--synthesis", f.synthesis, "bayes|convex|both");
    run_cmd->add_option("--format", f.format, "text|json|both");
    std::string report_dir;
    auto* report = app.add_subcommand("report", "Render tables from a run's JSON artifacts");
    report->add_option("dir", report_dir, "Artifact directory")->required();
    auto* simulate = app.add_subcommand("simulate", "Write a synthetic data set with the ozone schema");
    simulate->add_option("--n", f.n, "Rows")->default_val(330);
    simulate->add_option("--seed", f.sim_seed, "Seed")->default_val(7);
    simulate->add_option("--out", f.out, "Output CSV")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }

    const ScopedWarningCapture capture([&err](std::string_view msg) { err << "warning: " << msg << "\n"; });
    int code = kSuccess;
    try {
        if (split->parsed()) code = cmd_split(f, out);
        if (run_cmd->parsed()) code = cmd_run(f, out);
        if (report->parsed()) code = cmd_report(report_dir, out);
        if (simulate->parsed()) code = cmd_simulate(f, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        code = kConfigError;
    } catch (const ProvenanceError& e) {
        err << "config error: " << e.what() << "\n";
        code = kConfigError;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        code = kDataError;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        code = kNumericError;
    } catch (const fs::filesystem_error& e) {
        err << "config error: " << e.what() << "\n";
        code = kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        code = kUnexpected;
    }
    return code;
}

}  // namespace bsynth::cli
