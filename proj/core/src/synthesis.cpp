#include <bsynth/synthesis.hpp>

#include <bsynth/diagnostics.hpp>
#include <bsynth/error.hpp>
#include <bsynth/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <nlohmann/json.hpp>

namespace bsynth {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kUnderflow = 1e-300;

double log_sum_exp(std::span<const double> v) {
    double peak = kNegInf;
    for (double x : v) peak = std::max(peak, x);
    if (!std::isfinite(peak)) return peak;
    double s = 0.0;
    for (double x : v) s += std::exp(x - peak);
    return peak + std::log(s);
}

}  // namespace

double mc_log_marginal(std::span<const double> draw_log_likelihoods) {
    if (draw_log_likelihoods.empty()) throw ConfigError("mc marginal: need at least one draw");
    const double lse = log_sum_exp(draw_log_likelihoods);
    if (!std::isfinite(lse)) {
        warn("mc marginal: every draw has zero likelihood");
        return kNegInf;
    }
    return lse - std::log(static_cast<double>(draw_log_likelihoods.size()));
}

double mc_log_marginal(const NigPosterior& post, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       std::size_t draws, Rng& rng) {
    if (draws < 1) throw ConfigError("mc marginal: need at least one draw");
    if (x.rows() != y.size()) throw ConfigError("mc marginal: design/response length mismatch");
    if (x.rows() == 0) return 0.0;
    // Draw in blocks so memory stays bounded for large N.
    constexpr std::size_t block = 4096;
    std::vector<double> ll;
    ll.reserve(draws);
    for (std::size_t done = 0; done < draws; done += block) {
        const auto batch = sample_nig(post, std::min(block, draws - done), rng);
        for (const auto& d : batch) ll.push_back(gaussian_log_likelihood(x, y, d));
    }
    return mc_log_marginal(std::span<const double>(ll));
}

double model_log_marginal(const ModelMixture& mix, const Dataset& data, std::span<const std::size_t> rows,
                          const MarginalMethod& method) {
    if (method.kind == MarginalMethod::Kind::analytic) return mixture_log_marginal(mix, data, rows);
    if (rows.empty()) return 0.0;
    std::vector<double> terms;
    for (std::size_t j = 0; j < mix.size(); ++j) {
        if (mix.weights()[j] <= 0.0) continue;
        const auto& c = mix.components()[j];
        const Design d = build_design(data, c.spec, rows);
        Rng rng(derive_seed(method.seed, "mc-component-" + std::to_string(j)));
        terms.push_back(std::log(mix.weights()[j]) + mc_log_marginal(c.posterior, d.x, d.y, method.draws, rng));
    }
    return log_sum_exp(terms);
}

void check_common_provenance(const std::vector<const ModelMixture*>& models, std::span<const std::size_t> eval_rows) {
    if (models.empty()) throw ConfigError("provenance: no models");
    const auto& ref = models.front()->absorbed();
    for (const auto* m : models) {
        if (m->absorbed() != ref) throw ProvenanceError("models not updated to common data");
    }
    for (std::size_t r : eval_rows) {
        if (std::binary_search(ref.begin(), ref.end(), r)) {
            throw ProvenanceError("evaluation row " + std::to_string(r) + " was already absorbed by the models");
        }
    }
}

double pairwise_log_bf(const ModelMixture& model_i, const ModelMixture& model_j, const Dataset& data,
                       std::span<const std::size_t> eval_rows, const MarginalMethod& method) {
    check_common_provenance({&model_i, &model_j}, eval_rows);
    if (&model_i == &model_j) return 0.0;
    return model_log_marginal(model_i, data, eval_rows, method) - model_log_marginal(model_j, data, eval_rows, method);
}

BayesFactorMatrix bf_matrix_from_log_marginals(const std::vector<double>& log_marginals) {
    const auto k = static_cast<Eigen::Index>(log_marginals.size());
    if (k < 1) throw ConfigError("bf matrix: no models");
    BayesFactorMatrix m;
    m.log_marginals = log_marginals;
    m.log_bf = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i + 1; j < k; ++j) {
            const double l = log_marginals[static_cast<std::size_t>(i)] - log_marginals[static_cast<std::size_t>(j)];
            m.log_bf(i, j) = l;
            m.log_bf(j, i) = -l;
        }
    }
    return m;
}

BayesFactorMatrix bf_matrix(const std::vector<ModelMixture>& models, const Dataset& data,
                            std::span<const std::size_t> eval_rows, const MarginalMethod& method) {
    std::vector<const ModelMixture*> ptrs;
    for (const auto& m : models) ptrs.push_back(&m);
    check_common_provenance(ptrs, eval_rows);
    std::vector<double> lm;
    for (std::size_t i = 0; i < models.size(); ++i) {
        MarginalMethod mi = method;
        mi.seed = derive_seed(method.seed, "mc-model-" + std::to_string(i));
        lm.push_back(model_log_marginal(models[i], data, eval_rows, mi));
    }
    BayesFactorMatrix m = bf_matrix_from_log_marginals(lm);
    m.eval_rows.assign(eval_rows.begin(), eval_rows.end());
    m.absorbed = models.front().absorbed();
    return m;
}

std::string to_string(SynthesisMode mode) { return mode == SynthesisMode::bayesian ? "bayesian" : "convex"; }

SynthesisWeights normalize_log_weights(std::vector<double> log_raw, SynthesisMode mode) {
    if (log_raw.empty()) throw ConfigError("weights: no analysts");
    SynthesisWeights w;
    w.mode = mode;
    const double peak = *std::max_element(log_raw.begin(), log_raw.end());
    if (!std::isfinite(peak)) throw NumericError("weights: no analyst has a finite log weight");
    w.weights.resize(log_raw.size());
    double total = 0.0;
    for (std::size_t i = 0; i < log_raw.size(); ++i) {
        w.weights[i] = std::isnan(log_raw[i]) ? 0.0 : std::exp(log_raw[i] - peak);
        total += w.weights[i];
    }
    for (std::size_t i = 0; i < log_raw.size(); ++i) {
        w.weights[i] /= total;
        if (w.weights[i] < kUnderflow) {
            if (w.weights[i] > 0.0 || std::isfinite(log_raw[i])) w.clamped.push_back(i);
            w.weights[i] = 0.0;
        }
    }
    if (!w.clamped.empty()) {
        std::string msg = "weights: clamped to 0 after underflow:";
        for (auto i : w.clamped) msg += " " + std::to_string(i);
        warn(msg);
    }
    w.log_raw = std::move(log_raw);
    return w;
}

SynthesisWeights geometric_mean_weights(const Eigen::MatrixXd& log_bf) {
    const auto k = log_bf.rows();
    if (k < 1 || log_bf.cols() != k) throw ConfigError("geometric mean weights: matrix must be square and nonempty");
    for (Eigen::Index i = 0; i < k; ++i) {
        if (log_bf(i, i) != 0.0) throw ConfigError("geometric mean weights: diagonal must be 0 (B_ii = 1)");
    }
    std::vector<double> logs(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i) logs[static_cast<std::size_t>(i)] = log_bf.row(i).sum() / static_cast<double>(k);
    return normalize_log_weights(std::move(logs), SynthesisMode::bayesian);
}

SynthesisWeights convex_weights(std::size_t k, const std::optional<std::vector<double>>& fixed) {
    if (k < 1) throw ConfigError("convex weights: k must be >= 1");
    SynthesisWeights w;
    w.mode = SynthesisMode::convex;
    if (fixed) {
        w.weights = fixed_subjective_weights(k, *fixed);
    } else {
        w.weights.assign(k, 1.0 / static_cast<double>(k));
    }
    for (double b : w.weights) w.log_raw.push_back(b > 0.0 ? std::log(b) : kNegInf);
    return w;
}

std::vector<ModelMixture> equalize_provenance(const std::vector<ModelMixture>& models, const Dataset& data) {
    std::vector<std::size_t> all;
    for (const auto& m : models) all.insert(all.end(), m.absorbed().begin(), m.absorbed().end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    std::vector<ModelMixture> out;
    out.reserve(models.size());
    for (const auto& m : models) {
        std::vector<std::size_t> missing;
        std::set_difference(all.begin(), all.end(), m.absorbed().begin(), m.absorbed().end(),
                            std::back_inserter(missing));
        out.push_back(mixture_update(m, data, missing));
    }
    return out;
}

SynthesizedModel::SynthesizedModel(std::vector<ModelMixture> analysts, SynthesisWeights weights)
    : analysts_(std::move(analysts)), weights_(std::move(weights)) {
    if (analysts_.empty()) throw ConfigError("synthesis: no analysts");
    if (weights_.weights.size() != analysts_.size()) {
        throw ConfigError("synthesis: " + std::to_string(weights_.weights.size()) + " weights for " +
                          std::to_string(analysts_.size()) + " analysts");
    }
    std::vector<const ModelMixture*> ptrs;
    for (const auto& a : analysts_) ptrs.push_back(&a);
    check_common_provenance(ptrs, {});
}

PredictiveDistribution SynthesizedModel::predictive(const Dataset& data, std::size_t row) const {
    std::vector<PredictiveDistribution> parts;
    parts.reserve(analysts_.size());
    for (const auto& a : analysts_) parts.push_back(mixture_predictive(a, data, row));
    return PredictiveDistribution::combine(parts, weights_.weights);
}

IntegerPredictive SynthesizedModel::integer_predictive(const Dataset& data, std::size_t row) const {
    return discretize(predictive(data, row));
}

SynthesizedModel synthesize(std::vector<ModelMixture> analysts, SynthesisWeights weights) {
    return SynthesizedModel(std::move(analysts), std::move(weights));
}

AbsorbResult absorb_batch(const SynthesizedModel& model, const Dataset& data, std::span<const std::size_t> rows) {
    std::vector<const ModelMixture*> ptrs;
    for (const auto& a : model.analysts()) ptrs.push_back(&a);
    check_common_provenance(ptrs, rows);
    std::vector<double> lm;
    std::vector<ModelMixture> next;
    for (const auto& a : model.analysts()) {
        lm.push_back(mixture_log_marginal(a, data, rows));
        next.push_back(mixture_update(a, data, rows));
    }
    SynthesisWeights w = model.weights();
    if (w.mode == SynthesisMode::bayesian) {
        std::vector<double> logs = w.log_raw;
        for (std::size_t i = 0; i < logs.size(); ++i) logs[i] += lm[i];
        w = normalize_log_weights(std::move(logs), SynthesisMode::bayesian);
    }
    return {SynthesizedModel(std::move(next), std::move(w)), std::move(lm)};
}

SequentialResult sequential_update(const SynthesizedModel& model, const BatchSchedule& schedule, const Dataset& data) {
    SequentialResult out{model, {}, {}, {}};
    out.trajectory.mode = model.weights().mode;
    out.trajectory.initial_weights = model.weights().weights;
    for (std::size_t b = 0; b < schedule.batches.size(); ++b) {
        const auto& rows = schedule.batches[b];
        for (std::size_t r : rows) {
            out.predicted_rows.push_back(r);
            out.predictions.push_back(out.final_model.predictive(data, r));
        }
        TrajectoryStep step;
        step.batch = b;
        step.rows = rows;
        step.weights_before = out.final_model.weights().weights;
        AbsorbResult next = absorb_batch(out.final_model, data, rows);
        step.log_marginals = std::move(next.log_marginals);
        out.final_model = std::move(next.model);
        step.weights_after = out.final_model.weights().weights;
        out.trajectory.steps.push_back(std::move(step));
    }
    return out;
}

void to_json(nlohmann::json& j, const SynthesisWeights& w) {
    j = nlohmann::json{{"mode", to_string(w.mode)}, {"weights", w.weights}, {"clamped", w.clamped}};
    auto& raw = j["log_raw"] = nlohmann::json::array();
    for (double v : w.log_raw) raw.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
}

void to_json(nlohmann::json& j, const WeightTrajectory& t) {
    j = nlohmann::json{{"mode", to_string(t.mode)}, {"initial_weights", t.initial_weights}};
    auto& steps = j["steps"] = nlohmann::json::array();
    for (const auto& s : t.steps) {
        nlohmann::json lm = nlohmann::json::array();
        for (double v : s.log_marginals) lm.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
        steps.push_back({{"batch", s.batch},
                         {"rows", s.rows},
                         {"log_marginals", lm},
                         {"weights_before", s.weights_before},
                         {"weights_after", s.weights_after}});
    }
}

void from_json(const nlohmann::json& j, WeightTrajectory& t) {
    t = WeightTrajectory{};
    const auto mode = j.at("mode").get<std::string>();
    if (mode != "bayesian" && mode != "convex") throw DataError("trajectory: unknown mode '" + mode + "'");
    t.mode = mode == "bayesian" ? SynthesisMode::bayesian : SynthesisMode::convex;
    j.at("initial_weights").get_to(t.initial_weights);
    for (const auto& s : j.at("steps")) {
        TrajectoryStep step;
        step.batch = s.at("batch").get<std::size_t>();
        s.at("rows").get_to(step.rows);
        for (const auto& v : s.at("log_marginals")) step.log_marginals.push_back(v.is_null() ? kNegInf : v.get<double>());
        s.at("weights_before").get_to(step.weights_before);
        s.at("weights_after").get_to(step.weights_after);
        t.steps.push_back(std::move(step));
    }
}

}  // namespace bsynth
