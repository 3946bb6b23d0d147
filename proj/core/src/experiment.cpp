#include <bsynth/experiment.hpp>

#include <bsynth/error.hpp>
#include <bsynth/rng.hpp>

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

namespace bsynth {

std::string to_string(Protocol p) { return p == Protocol::once ? "once" : "ten_by_ten"; }

Protocol parse_protocol(const std::string& name) {
    if (name == "once") return Protocol::once;
    if (name == "ten_by_ten" || name == "ten" || name == "10/10") return Protocol::ten_by_ten;
    throw ConfigError("unknown protocol '" + name + "' (expected once or ten_by_ten)");
}

void ExperimentPlan::validate(const Dataset& data, std::size_t n_programs) const {
    split.validate();
    if (split.n_rows != data.rows()) {
        throw ConfigError("plan: split covers " + std::to_string(split.n_rows) + " rows, data has " +
                          std::to_string(data.rows()));
    }
    if (n_programs != split.k) {
        throw ConfigError("plan: " + std::to_string(n_programs) + " analyst programs for k = " +
                          std::to_string(split.k) + " splits (program i is trained on split i)");
    }
    for (std::size_t t : test_splits) {
        if (t >= split.k) throw ConfigError("plan: test split " + std::to_string(t + 1) + " out of range");
    }
    if (protocols.empty()) throw ConfigError("plan: no protocols selected");
    if (batch_size < 1) throw ConfigError("plan: batch size must be >= 1");
    if (!response.log) throw ConfigError("plan: the evaluation protocols model the log response");
    data.column_index(response.column);
    if (convex_weights) fixed_subjective_weights(split.k - 1, *convex_weights);
}

std::vector<std::size_t> ExperimentPlan::selected_test_splits() const {
    if (!test_splits.empty()) return test_splits;
    std::vector<std::size_t> all(split.k);
    for (std::size_t i = 0; i < split.k; ++i) all[i] = i;
    return all;
}

std::vector<std::size_t> ExperimentPlan::training_rows(std::size_t test) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < split.k; ++i) {
        if (i != test) rows.insert(rows.end(), split.parts[i].begin(), split.parts[i].end());
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

BatchSchedule ExperimentPlan::schedule(std::size_t test) const {
    const auto& part = split.parts.at(test);
    return batch_partition(part, std::min(batch_size, part.size()),
                           derive_seed(seed, "batches/split-" + std::to_string(test + 1)));
}

ExperimentPlan make_plan(const Dataset& data, std::size_t k, std::uint64_t seed) {
    ExperimentPlan plan;
    plan.seed = seed;
    plan.split = split_random(data, k, derive_seed(seed, "split"));
    return plan;
}

AnalystProgram seeded_program(const AnalystProgram& program, std::uint64_t master_seed) {
    AnalystProgram p = program;
    p.seed = derive_seed(master_seed ^ program.seed, "analyst/" + program.id);
    return p;
}

const MethodResult* CellResult::find(const std::string& method) const {
    for (const auto& m : methods) {
        if (m.method == method) return &m;
    }
    return nullptr;
}

std::optional<double> MetricsReport::value(const std::string& method, std::size_t split, const std::string& protocol,
                                           const std::string& metric) const {
    for (const auto& r : records) {
        if (r.method == method && r.split == split && r.protocol == protocol && r.metric == metric) return r.value;
    }
    return std::nullopt;
}

void MetricsReport::merge(const MetricsReport& other) {
    for (const auto& m : other.method_order) {
        if (std::find(method_order.begin(), method_order.end(), m) == method_order.end()) method_order.push_back(m);
    }
    for (auto s : other.splits) {
        if (std::find(splits.begin(), splits.end(), s) == splits.end()) splits.push_back(s);
    }
    std::sort(splits.begin(), splits.end());
    records.insert(records.end(), other.records.begin(), other.records.end());
    trajectories.insert(trajectories.end(), other.trajectories.begin(), other.trajectories.end());
}

void to_json(nlohmann::json& j, const MetricRecord& r) {
    j = nlohmann::json{{"method", r.method}, {"split", r.split}, {"protocol", r.protocol}, {"metric", r.metric}};
    j["value"] = std::isfinite(r.value) ? nlohmann::json(r.value) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, MetricRecord& r) {
    r.method = j.at("method").get<std::string>();
    r.split = j.at("split").get<std::size_t>();
    r.protocol = j.at("protocol").get<std::string>();
    r.metric = j.at("metric").get<std::string>();
    const auto& v = j.at("value");
    r.value = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

void to_json(nlohmann::json& j, const MetricsReport& r) {
    j = nlohmann::json{{"method_order", r.method_order}, {"splits", r.splits}, {"records", r.records}};
    auto& t = j["trajectories"] = nlohmann::json::array();
    for (const auto& tr : r.trajectories) {
        t.push_back({{"method", tr.method}, {"split", tr.split}, {"trajectory", tr.trajectory}});
    }
}

void from_json(const nlohmann::json& j, MetricsReport& r) {
    r = MetricsReport{};
    j.at("method_order").get_to(r.method_order);
    if (j.contains("splits")) j.at("splits").get_to(r.splits);
    j.at("records").get_to(r.records);
    if (j.contains("trajectories")) {
        for (const auto& t : j.at("trajectories")) {
            r.trajectories.push_back(
                {t.at("method").get<std::string>(), t.at("split").get<std::size_t>(), t.at("trajectory").get<WeightTrajectory>()});
        }
    }
}

void to_json(nlohmann::json& j, const CellResult& c) {
    j = nlohmann::json{{"split", c.test_split + 1}, {"protocol", to_string(c.protocol)}};
    auto& methods = j["predictions"] = nlohmann::json::array();
    for (const auto& m : c.methods) {
        nlohmann::json cases = nlohmann::json::array();
        for (std::size_t i = 0; i < m.rows.size(); ++i) {
            const auto& f = m.forecasts[i];
            nlohmann::json e{{"row", m.rows[i]},
                             {"log_point", f.log_point},
                             {"ozone_point", f.ozone_point},
                             {"exceed", f.exceed == Exceedance::exceed}};
            if (f.distribution) e["log_variance"] = f.distribution->variance();
            cases.push_back(std::move(e));
        }
        methods.push_back({{"method", m.method}, {"cases", std::move(cases)}});
    }
}

CellResult evaluate_cell(std::vector<std::unique_ptr<Method>>& methods, const Dataset& data,
                         std::span<const std::size_t> test_rows, Protocol protocol, const BatchSchedule* schedule,
                         std::size_t test_split) {
    CellResult cell;
    cell.test_split = test_split;
    cell.protocol = protocol;
    for (const auto& m : methods) cell.methods.push_back({m->name(), m->bayesian(), {}, {}, std::nullopt});

    const auto predict = [&](std::span<const std::size_t> rows) {
        for (std::size_t i = 0; i < methods.size(); ++i) {
            for (std::size_t r : rows) {
                if (methods[i]->has_seen(r)) {
                    throw ProvenanceError(methods[i]->name() + ": asked to forecast row " + std::to_string(r) +
                                          " after absorbing it");
                }
                cell.methods[i].rows.push_back(r);
                cell.methods[i].forecasts.push_back(methods[i]->forecast(data, r));
            }
        }
    };

    std::vector<std::size_t> sorted(test_rows.begin(), test_rows.end());
    std::sort(sorted.begin(), sorted.end());
    if (protocol == Protocol::once) {
        predict(sorted);
    } else {
        if (schedule == nullptr) throw ConfigError("ten by ten evaluation needs a batch schedule");
        std::vector<std::size_t> flat = schedule->flattened();
        std::sort(flat.begin(), flat.end());
        if (flat != sorted) throw ConfigError("batch schedule does not cover the test split exactly");
        for (const auto& batch : schedule->batches) {
            predict(batch);
            for (auto& m : methods) m->absorb(data, batch);
        }
    }
    for (std::size_t i = 0; i < methods.size(); ++i) cell.methods[i].trajectory = methods[i]->trajectory();
    return cell;
}

std::vector<MetricRecord> method_metrics(const MethodResult& result, const Dataset& data, const ResponseSpec& response,
                                         std::size_t split_1based, Protocol protocol) {
    const std::size_t n = result.rows.size();
    std::vector<double> pred_log(n), pred_ozone(n), truth_log(n), truth_ozone(n);
    std::vector<Exceedance> exceed(n);
    const std::size_t col = data.column_index(response.column);
    for (std::size_t i = 0; i < n; ++i) {
        pred_log[i] = result.forecasts[i].log_point;
        pred_ozone[i] = result.forecasts[i].ozone_point;
        exceed[i] = result.forecasts[i].exceed;
        truth_ozone[i] = data(result.rows[i], col);
        truth_log[i] = response_value(data, response, result.rows[i]);
    }
    std::vector<MetricRecord> out;
    const auto add = [&](const std::string& metric, double value) {
        out.push_back({result.method, split_1based, to_string(protocol), metric, value});
    };
    add("n_cases", static_cast<double>(n));
    add("sse_log", sse_log(pred_log, truth_log));
    add("mse_ozone", mse_ozone_bayes_means(pred_ozone, truth_ozone));
    const ClassificationCounts cc = classification_errors(exceed, truth_ozone);
    add("classification_errors", static_cast<double>(cc.errors()));
    add("false_positives", static_cast<double>(cc.false_positives));
    add("false_negatives", static_cast<double>(cc.false_negatives));
    if (result.bayesian) {
        std::vector<PredictiveDistribution> dists;
        dists.reserve(n);
        for (const auto& f : result.forecasts) dists.push_back(*f.distribution);
        const Calibration cal = calibration_summary(dists, truth_log);
        add("coverage_pct", interval_coverage(dists, truth_log, 0.90));
        add("avg_pred_var", cal.avg_var);
        add("mse_log_per_case", cal.mse);
        add("optimism", cal.optimism);
    }
    return out;
}

std::vector<MetricRecord> mean_human_prediction_error(const std::vector<std::vector<MetricRecord>>& analyst_records) {
    if (analyst_records.empty()) throw ConfigError("mean human prediction error: no analysts");
    std::vector<MetricRecord> out;
    for (const auto& first : analyst_records.front()) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& recs : analyst_records) {
            for (const auto& r : recs) {
                if (r.metric == first.metric && r.split == first.split && r.protocol == first.protocol) {
                    sum += r.value;
                    ++count;
                    break;
                }
            }
        }
        if (count != analyst_records.size()) continue;  // metric not reported by every analyst
        out.push_back({kMeanHuman, first.split, first.protocol, first.metric, sum / static_cast<double>(count)});
    }
    return out;
}

namespace {

std::vector<FeatureTransform> default_baseline_candidates(const Dataset& data, const ResponseSpec& response) {
    std::vector<FeatureTransform> out;
    for (const auto& c : data.columns()) {
        if (c != response.column) out.push_back(FeatureTransform::identity(c));
    }
    return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan, const std::vector<AnalystProgram>& programs,
                                const Dataset& data) {
    plan.validate(data, programs.size());
    const std::size_t k = plan.split.k;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (programs[i].id == programs[j].id) throw ConfigError("duplicate analyst id '" + programs[i].id + "'");
        }
        const std::string& id = programs[i].id;
        if (id == kMeanHuman || id == kBayesSynthesis || id == kConvexSynthesis || id == "aic" || id == "bic") {
            throw ConfigError("analyst id '" + id + "' is reserved");
        }
    }
    const auto candidates =
        plan.baseline_candidates.empty() ? default_baseline_candidates(data, plan.response) : plan.baseline_candidates;

    ExperimentResult result;
    MetricsReport& report = result.report;
    for (const auto& p : programs) report.method_order.push_back(p.id);
    report.method_order.push_back(kMeanHuman);
    for (auto mode : plan.synthesis_modes) {
        report.method_order.push_back(mode == SynthesisMode::bayesian ? kBayesSynthesis : kConvexSynthesis);
    }
    if (plan.baselines) {
        report.method_order.push_back("aic");
        report.method_order.push_back("bic");
    }
    for (std::size_t s = 1; s <= k; ++s) report.splits.push_back(s);

    std::vector<std::optional<ModelMixture>> trained(k);
    for (std::size_t t : plan.selected_test_splits()) {
        std::vector<std::size_t> eligible;
        std::vector<ModelMixture> summaries;
        for (std::size_t i = 0; i < k; ++i) {
            if (i == t) continue;
            if (!trained[i]) trained[i] = run_analyst(seeded_program(programs[i], plan.seed), data, plan.split.parts[i]);
            eligible.push_back(i);
            summaries.push_back(*trained[i]);
        }
        const std::vector<ModelMixture> common = equalize_provenance(summaries, data);
        const std::vector<std::size_t> train_rows = plan.training_rows(t);

        for (Protocol protocol : plan.protocols) {
            std::vector<std::unique_ptr<Method>> methods;
            for (std::size_t e = 0; e < eligible.size(); ++e) {
                methods.push_back(std::make_unique<AnalystMethod>(programs[eligible[e]].id, common[e]));
            }
            for (auto mode : plan.synthesis_modes) {
                SynthesisWeights w = mode == SynthesisMode::bayesian
                                         ? normalize_log_weights(std::vector<double>(common.size(), 0.0), mode)
                                         : convex_weights(common.size(), plan.convex_weights);
                methods.push_back(std::make_unique<SynthesisMethod>(
                    mode == SynthesisMode::bayesian ? kBayesSynthesis : kConvexSynthesis, synthesize(common, w)));
            }
            if (plan.baselines) {
                methods.push_back(
                    std::make_unique<IcMethod>("aic", Criterion::aic, candidates, plan.response, data, train_rows));
                methods.push_back(
                    std::make_unique<IcMethod>("bic", Criterion::bic, candidates, plan.response, data, train_rows));
            }
            std::optional<BatchSchedule> schedule;
            if (protocol == Protocol::ten_by_ten) schedule = plan.schedule(t);
            CellResult cell = evaluate_cell(methods, data, plan.split.parts[t], protocol,
                                            schedule ? &*schedule : nullptr, t);

            std::vector<std::vector<MetricRecord>> analyst_records;
            std::vector<MetricRecord> cell_records;
            for (const auto& m : cell.methods) {
                auto recs = method_metrics(m, data, plan.response, t + 1, protocol);
                if (m.method != kBayesSynthesis && m.method != kConvexSynthesis && m.method != "aic" && m.method != "bic") {
                    analyst_records.push_back(recs);
                }
                cell_records.insert(cell_records.end(), recs.begin(), recs.end());
                if (protocol == Protocol::ten_by_ten && m.trajectory) {
                    report.trajectories.push_back({m.method, t + 1, *m.trajectory});
                }
            }
            auto mh = mean_human_prediction_error(analyst_records);
            // Keep the table order: analysts, mean human, then the rest.
            const auto first_other = std::find_if(cell_records.begin(), cell_records.end(), [](const MetricRecord& r) {
                return r.method == kBayesSynthesis || r.method == kConvexSynthesis || r.method == "aic" || r.method == "bic";
            });
            cell_records.insert(first_other, mh.begin(), mh.end());
            report.records.insert(report.records.end(), cell_records.begin(), cell_records.end());
            result.cells.push_back(std::move(cell));
        }
    }
    return result;
}

MetricsReport run_once(ExperimentPlan plan, const std::vector<AnalystProgram>& programs, const Dataset& data) {
    plan.protocols = {Protocol::once};
    return run_experiment(plan, programs, data).report;
}

MetricsReport run_ten_by_ten(ExperimentPlan plan, const std::vector<AnalystProgram>& programs, const Dataset& data) {
    plan.protocols = {Protocol::ten_by_ten};
    return run_experiment(plan, programs, data).report;
}

}  // namespace bsynth
