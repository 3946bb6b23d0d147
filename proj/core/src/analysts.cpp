#include <bsynth/analysts.hpp>

#include <bsynth/diagnostics.hpp>
#include <bsynth/error.hpp>
#include <bsynth/rng.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

namespace bsynth {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> softmax(const std::vector<double>& logs) {
    const double peak = *std::max_element(logs.begin(), logs.end());
    if (!std::isfinite(peak)) throw NumericError("weights: every candidate has log weight -inf");
    std::vector<double> w(logs.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logs.size(); ++i) {
        w[i] = std::isfinite(logs[i]) ? std::exp(logs[i] - peak) : 0.0;
        total += w[i];
    }
    for (auto& v : w) v /= total;
    return w;
}

std::vector<std::size_t> sorted_union(const std::vector<std::size_t>& a, std::span<const std::size_t> b) {
    std::vector<std::size_t> out(a);
    out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

void PriorSettings::validate() const {
    if (!(g > 0.0) || !std::isfinite(g)) throw ConfigError("prior: g must be positive");
    if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
        throw ConfigError("prior: shape and rate must be positive");
    }
}

ModelMixture::ModelMixture(std::vector<MixtureComponent> components, std::vector<double> weights,
                           std::vector<std::size_t> absorbed)
    : components_(std::move(components)), weights_(std::move(weights)), absorbed_(std::move(absorbed)) {
    if (components_.empty()) throw ConfigError("mixture: no components");
    if (weights_.size() != components_.size()) {
        throw ConfigError("mixture: " + std::to_string(weights_.size()) + " weights for " +
                          std::to_string(components_.size()) + " components");
    }
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("mixture: weights must be nonnegative");
        total += w;
    }
    if (!(total > 0.0) || std::abs(total - 1.0) > 1e-9) {
        throw ConfigError("mixture: weights sum to " + std::to_string(total));
    }
    for (auto& w : weights_) w /= total;
    for (const auto& c : components_) {
        if (c.spec.dimension() != c.posterior.dimension()) {
            throw ConfigError("mixture: design dimension does not match posterior dimension");
        }
    }
    std::sort(absorbed_.begin(), absorbed_.end());
    if (std::adjacent_find(absorbed_.begin(), absorbed_.end()) != absorbed_.end()) {
        throw ProvenanceError("mixture: a row was absorbed twice");
    }
}

std::vector<double> component_log_marginals(const ModelMixture& mix, const Dataset& data,
                                            std::span<const std::size_t> rows) {
    std::vector<double> out;
    out.reserve(mix.size());
    for (const auto& c : mix.components()) {
        const Design d = build_design(data, c.spec, rows);
        out.push_back(log_marginal_likelihood(c.posterior, d.x, d.y));
    }
    return out;
}

double mixture_log_marginal(const ModelMixture& mix, const Dataset& data, std::span<const std::size_t> rows) {
    if (rows.empty()) return 0.0;
    const auto lml = component_log_marginals(mix, data, rows);
    double peak = kNegInf;
    for (std::size_t j = 0; j < lml.size(); ++j) {
        if (mix.weights()[j] > 0.0) peak = std::max(peak, std::log(mix.weights()[j]) + lml[j]);
    }
    if (!std::isfinite(peak)) {
        warn("mixture log marginal: every component gives -inf");
        return kNegInf;
    }
    double s = 0.0;
    for (std::size_t j = 0; j < lml.size(); ++j) {
        if (mix.weights()[j] > 0.0) s += std::exp(std::log(mix.weights()[j]) + lml[j] - peak);
    }
    return peak + std::log(s);
}

ModelMixture mixture_update(const ModelMixture& mix, const Dataset& data, std::span<const std::size_t> rows) {
    if (rows.empty()) return mix;
    for (std::size_t r : rows) {
        if (std::binary_search(mix.absorbed().begin(), mix.absorbed().end(), r)) {
            throw ProvenanceError("mixture update: row " + std::to_string(r) + " already absorbed");
        }
    }
    std::vector<MixtureComponent> next;
    std::vector<double> logw;
    next.reserve(mix.size());
    for (std::size_t j = 0; j < mix.size(); ++j) {
        const auto& c = mix.components()[j];
        const Design d = build_design(data, c.spec, rows);
        const double lml = log_marginal_likelihood(c.posterior, d.x, d.y);
        next.push_back({c.spec, update_nig(c.posterior, d.x, d.y)});
        logw.push_back(mix.weights()[j] > 0.0 ? std::log(mix.weights()[j]) + lml : kNegInf);
    }
    return ModelMixture(std::move(next), softmax(logw), sorted_union(mix.absorbed(), rows));
}

PredictiveDistribution mixture_predictive(const ModelMixture& mix, const std::vector<Eigen::VectorXd>& x) {
    if (x.size() != mix.size()) throw ConfigError("mixture predictive: one predictor vector per component required");
    PredictiveDistribution out;
    for (std::size_t j = 0; j < mix.size(); ++j) {
        if (mix.weights()[j] <= 0.0) continue;
        out.components.push_back({mix.weights()[j], mix.components()[j].posterior.predictive(x[j])});
    }
    return out;
}

PredictiveDistribution mixture_predictive(const ModelMixture& mix, const Dataset& data, std::size_t row) {
    std::vector<Eigen::VectorXd> x;
    x.reserve(mix.size());
    for (const auto& c : mix.components()) x.push_back(feature_vector(data, c.spec, row));
    return mixture_predictive(mix, x);
}

std::string to_string(WeightingRule rule) {
    switch (rule) {
        case WeightingRule::cv_geometric: return "cv_geometric";
        case WeightingRule::fixed_subjective: return "fixed_subjective";
        case WeightingRule::bic: return "bic";
    }
    return "?";
}

WeightingRule parse_weighting_rule(const std::string& name) {
    if (name == "cv_geometric" || name == "cv-geometric") return WeightingRule::cv_geometric;
    if (name == "fixed_subjective" || name == "fixed-subjective" || name == "fixed") {
        return WeightingRule::fixed_subjective;
    }
    if (name == "bic") return WeightingRule::bic;
    throw ConfigError("unknown weighting rule '" + name + "' (expected cv_geometric, fixed_subjective or bic)");
}

void AnalystProgram::validate() const {
    if (id.empty()) throw ConfigError("analyst program: empty id");
    prior.validate();
    if (lars) {
        if (!candidates.empty()) throw ConfigError("analyst '" + id + "': give either candidates or lars, not both");
        if (lars->main_effects.empty()) throw ConfigError("analyst '" + id + "': lars needs main_effects");
        if (lars->n_models < 1) throw ConfigError("analyst '" + id + "': lars n_models must be >= 1");
        if (rule == WeightingRule::fixed_subjective && fixed_weights.size() != lars->n_models) {
            throw ConfigError("analyst '" + id + "': fixed weights must match lars n_models");
        }
    } else {
        if (candidates.empty()) throw ConfigError("analyst '" + id + "': no candidate designs");
        for (const auto& c : candidates) c.validate();
    }
    if (rule == WeightingRule::fixed_subjective) {
        fixed_subjective_weights(lars ? lars->n_models : candidates.size(), fixed_weights);
    } else if (!fixed_weights.empty()) {
        throw ConfigError("analyst '" + id + "': weights are only used by the fixed_subjective rule");
    }
    if (rule == WeightingRule::cv_geometric && (cv.reps < 1 || cv.n_holdout < 1)) {
        throw ConfigError("analyst '" + id + "': cv needs reps >= 1 and n_holdout >= 1");
    }
}

void to_json(nlohmann::json& j, const AnalystProgram& p) {
    j = nlohmann::json{{"id", p.id},
                       {"rule", to_string(p.rule)},
                       {"standardize", p.standardize},
                       {"seed", p.seed},
                       {"response", {{"column", p.response.column}, {"log", p.response.log}}},
                       {"prior", {{"g", p.prior.g}, {"shape", p.prior.shape}, {"rate", p.prior.rate}}}};
    if (!p.description.empty()) j["description"] = p.description;
    if (p.rule == WeightingRule::cv_geometric) j["cv"] = {{"n_holdout", p.cv.n_holdout}, {"reps", p.cv.reps}};
    if (!p.fixed_weights.empty()) j["weights"] = p.fixed_weights;
    if (p.lars) {
        j["lars"] = {{"main_effects", p.lars->main_effects},  {"forced_in", p.lars->forced_in},
                     {"hierarchy", p.lars->options.hierarchy}, {"squares", p.lars->options.squares},
                     {"interactions", p.lars->options.interactions}, {"max_steps", p.lars->options.max_steps},
                     {"n_models", p.lars->n_models}};
    } else {
        j["candidates"] = p.candidates;
    }
}

void from_json(const nlohmann::json& j, AnalystProgram& p) {
    static const std::vector<std::string> known = {"id",   "description", "rule", "standardize", "seed", "response",
                                                   "prior", "cv",         "weights", "candidates", "lars"};
    if (!j.is_object()) throw ConfigError("analyst program must be a mapping");
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("analyst program: unknown key '" + key + "'");
        }
    }
    p = AnalystProgram{};
    p.id = j.at("id").get<std::string>();
    p.description = j.value("description", std::string());
    p.rule = parse_weighting_rule(j.at("rule").get<std::string>());
    p.standardize = j.value("standardize", true);
    p.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("response")) {
        p.response.column = j.at("response").value("column", std::string("upo3"));
        p.response.log = j.at("response").value("log", true);
    }
    if (j.contains("prior")) {
        const auto& pr = j.at("prior");
        p.prior.g = pr.value("g", p.prior.g);
        p.prior.shape = pr.value("shape", p.prior.shape);
        p.prior.rate = pr.value("rate", p.prior.rate);
    }
    if (j.contains("cv")) {
        p.cv.n_holdout = j.at("cv").value("n_holdout", p.cv.n_holdout);
        p.cv.reps = j.at("cv").value("reps", p.cv.reps);
    }
    if (j.contains("weights")) p.fixed_weights = j.at("weights").get<std::vector<double>>();
    if (j.contains("candidates")) {
        for (const auto& c : j.at("candidates")) {
            DesignSpec spec;
            if (c.is_array()) {
                spec.features = c.get<std::vector<FeatureTransform>>();
            } else {
                spec = c.get<DesignSpec>();
            }
            // The response is a property of the program, not of a candidate.
            spec.response = p.response;
            spec.validate();
            p.candidates.push_back(std::move(spec));
        }
    }
    if (j.contains("lars")) {
        const auto& l = j.at("lars");
        LarsRecipe r;
        r.main_effects = l.at("main_effects").get<std::vector<std::string>>();
        r.forced_in = l.value("forced_in", std::vector<std::string>{});
        r.options.hierarchy = l.value("hierarchy", true);
        r.options.squares = l.value("squares", true);
        r.options.interactions = l.value("interactions", true);
        r.options.max_steps = l.value("max_steps", std::size_t{0});
        r.n_models = l.value("n_models", std::size_t{4});
        p.lars = std::move(r);
    }
    p.validate();
}

std::vector<double> geometric_mean_normalize(const Eigen::MatrixXd& fold_log_lik) {
    if (fold_log_lik.rows() == 0 || fold_log_lik.cols() == 0) throw ConfigError("cv weights: empty fold matrix");
    std::vector<double> mean_log(static_cast<std::size_t>(fold_log_lik.rows()));
    for (Eigen::Index i = 0; i < fold_log_lik.rows(); ++i) {
        const auto row = fold_log_lik.row(i);
        mean_log[static_cast<std::size_t>(i)] = row.allFinite() ? row.mean() : kNegInf;
    }
    return softmax(mean_log);
}

CvWeights cv_geometric_weights(const std::vector<DesignSpec>& candidates, const Dataset& data,
                               std::span<const std::size_t> rows, const PriorSettings& prior, std::size_t n_train,
                               std::size_t n_holdout, std::size_t reps, std::uint64_t seed) {
    if (candidates.empty()) throw ConfigError("cv weights: no candidates");
    if (reps < 1) throw ConfigError("cv weights: reps must be >= 1");
    if (n_holdout < 1 || n_train < 1) throw ConfigError("cv weights: n_train and n_holdout must be >= 1");
    if (n_train + n_holdout != rows.size()) {
        throw ConfigError("cv weights: n_train + n_holdout (" + std::to_string(n_train + n_holdout) +
                          ") must equal the data size (" + std::to_string(rows.size()) + ")");
    }
    CvWeights out;
    out.fold_log_lik.resize(static_cast<Eigen::Index>(candidates.size()), static_cast<Eigen::Index>(reps));
    Rng rng(seed);
    std::vector<std::size_t> perm(rows.begin(), rows.end());
    for (std::size_t rep = 0; rep < reps; ++rep) {
        rng.shuffle(std::span<std::size_t>(perm));
        const std::span<const std::size_t> train(perm.data(), n_train);
        const std::span<const std::size_t> hold(perm.data() + n_train, n_holdout);
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            double ll = kNegInf;
            try {
                const Design dt = build_design(data, candidates[c], train);
                const NigPosterior post = fit_nig(dt.x, dt.y, prior.prior_for(candidates[c].dimension()));
                const Design dh = build_design(data, candidates[c], hold);
                ll = log_marginal_likelihood(post, dh.x, dh.y);
            } catch (const NumericError& e) {
                warn("cv weights: candidate " + std::to_string(c) + " failed on fold " + std::to_string(rep) + ": " +
                     e.what());
            }
            out.fold_log_lik(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(rep)) = ll;
        }
    }
    out.weights = geometric_mean_normalize(out.fold_log_lik);
    return out;
}

std::vector<double> fixed_subjective_weights(std::size_t n_candidates, const std::vector<double>& weights) {
    if (weights.size() != n_candidates) {
        throw ConfigError("fixed weights: " + std::to_string(weights.size()) + " weights for " +
                          std::to_string(n_candidates) + " candidates");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("fixed weights: weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("fixed weights: weights sum to " + std::to_string(total));
    return weights;
}

std::vector<double> bic_weights(const std::vector<GaussianFit>& fits) {
    if (fits.empty()) throw ConfigError("bic weights: no candidates");
    std::vector<double> logs;
    logs.reserve(fits.size());
    for (const auto& f : fits) logs.push_back(f.n == 0 ? kNegInf : -0.5 * f.bic());
    return softmax(logs);
}

std::vector<double> bic_weights(const std::vector<DesignSpec>& candidates, const Dataset& data,
                                std::span<const std::size_t> rows) {
    std::vector<GaussianFit> fits;
    fits.reserve(candidates.size());
    for (const auto& c : candidates) {
        try {
            fits.push_back(fit_gaussian_ml(build_design(data, c, rows)));
        } catch (const NumericError& e) {
            warn(std::string("bic weights: fit failed: ") + e.what());
            fits.emplace_back();  // n == 0 marks failure
        }
    }
    return bic_weights(fits);
}

std::vector<DesignSpec> lars_candidates(const LarsRecipe& recipe, const ResponseSpec& response, const Dataset& data,
                                        std::span<const std::size_t> rows) {
    const LarsOrder order = modified_lars_order(data, rows, response, recipe.main_effects, recipe.forced_in,
                                                recipe.options);
    struct Scored {
        std::size_t length;
        double bic;
    };
    std::vector<Scored> scored;
    // Every prefix must contain the forced variables, so start after them.
    const std::size_t first = std::max<std::size_t>(1, recipe.forced_in.size());
    for (std::size_t len = first; len <= order.order.size(); ++len) {
        DesignSpec spec;
        spec.response = response;
        spec.features.assign(order.order.begin(), order.order.begin() + static_cast<std::ptrdiff_t>(len));
        try {
            scored.push_back({len, fit_gaussian_ml(build_design(data, spec, rows)).bic()});
        } catch (const NumericError&) {
            // too many terms for the split
        }
    }
    if (scored.size() < recipe.n_models) {
        throw ConfigError("lars: only " + std::to_string(scored.size()) + " fittable prefix models, " +
                          std::to_string(recipe.n_models) + " requested");
    }
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.bic < b.bic; });
    scored.resize(recipe.n_models);
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.length < b.length; });
    std::vector<DesignSpec> out;
    for (const auto& s : scored) {
        DesignSpec spec;
        spec.response = response;
        spec.features.assign(order.order.begin(), order.order.begin() + static_cast<std::ptrdiff_t>(s.length));
        out.push_back(std::move(spec));
    }
    return out;
}

ModelMixture fit_mixture(const std::vector<DesignSpec>& specs, const std::vector<double>& weights,
                         const PriorSettings& prior, const Dataset& data, std::span<const std::size_t> rows) {
    std::vector<MixtureComponent> comps;
    comps.reserve(specs.size());
    for (const auto& s : specs) {
        const Design d = build_design(data, s, rows);
        comps.push_back({s, fit_nig(d.x, d.y, prior.prior_for(s.dimension()))});
    }
    return ModelMixture(std::move(comps), weights, std::vector<std::size_t>(rows.begin(), rows.end()));
}

ModelMixture run_analyst(const AnalystProgram& program, const Dataset& data, std::span<const std::size_t> rows) {
    program.validate();
    if (rows.empty()) throw ConfigError("analyst '" + program.id + "': empty split");
    std::vector<DesignSpec> specs =
        program.lars ? lars_candidates(*program.lars, program.response, data, rows) : program.candidates;
    for (auto& s : specs) {
        s.response = program.response;
        s.validate(data);
        if (program.standardize) s = standardized(std::move(s), data, rows);
    }

    std::vector<double> weights;
    switch (program.rule) {
        case WeightingRule::cv_geometric: {
            if (program.cv.n_holdout >= rows.size()) {
                throw ConfigError("analyst '" + program.id + "': n_holdout must be smaller than the split");
            }
            weights = cv_geometric_weights(specs, data, rows, program.prior, rows.size() - program.cv.n_holdout,
                                           program.cv.n_holdout, program.cv.reps, program.seed)
                          .weights;
            break;
        }
        case WeightingRule::fixed_subjective:
            weights = fixed_subjective_weights(specs.size(), program.fixed_weights);
            break;
        case WeightingRule::bic: weights = bic_weights(specs, data, rows); break;
    }
    return fit_mixture(specs, weights, program.prior, data, rows);
}

}  // namespace bsynth
