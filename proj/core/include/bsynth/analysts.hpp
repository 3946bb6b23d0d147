#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include <bsynth/data.hpp>
#include <bsynth/design.hpp>
#include <bsynth/nig.hpp>
#include <bsynth/predictive.hpp>
#include <bsynth/selection.hpp>

namespace bsynth {

/// Default prior hyperparameters: m = 0, V = g I, noise InvGamma(shape, rate).
struct PriorSettings {
    double g = 100.0;
    double shape = 0.01;
    double rate = 0.01;

    NigPrior prior_for(std::size_t dimension) const { return NigPrior::vague(dimension, g, shape, rate); }
    void validate() const;
};

struct MixtureComponent {
    DesignSpec spec;
    NigPosterior posterior;
};

/// An analyst's Bayesian summary: conjugate posteriors over (possibly
/// different) designs with mixing weights, plus the dataset rows absorbed.
class ModelMixture {
public:
    /// Weights must be nonnegative, not all zero, and sum to 1 within 1e-9;
    /// they are renormalized exactly.
    ModelMixture(std::vector<MixtureComponent> components, std::vector<double> weights,
                 std::vector<std::size_t> absorbed = {});

    std::size_t size() const noexcept { return components_.size(); }
    const std::vector<MixtureComponent>& components() const noexcept { return components_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    /// Sorted row indices of every observation the posteriors contain.
    const std::vector<std::size_t>& absorbed() const noexcept { return absorbed_; }

private:
    std::vector<MixtureComponent> components_;
    std::vector<double> weights_;
    std::vector<std::size_t> absorbed_;

    friend ModelMixture mixture_update(const ModelMixture&, const Dataset&, std::span<const std::size_t>);
};

/// Per-component conditional log marginals of a batch.
std::vector<double> component_log_marginals(const ModelMixture& mix, const Dataset& data,
                                            std::span<const std::size_t> rows);

/// log sum_j w_j exp(lml_j). All components at -inf gives -inf with a warning.
double mixture_log_marginal(const ModelMixture& mix, const Dataset& data, std::span<const std::size_t> rows);

/// Updates each posterior with the batch and multiplies each weight by its
/// component's batch marginal likelihood. Throws ProvenanceError when a row
/// was already absorbed.
ModelMixture mixture_update(const ModelMixture& mix, const Dataset& data, std::span<const std::size_t> rows);

PredictiveDistribution mixture_predictive(const ModelMixture& mix, const Dataset& data, std::size_t row);
/// One predictor vector per component, in component order.
PredictiveDistribution mixture_predictive(const ModelMixture& mix, const std::vector<Eigen::VectorXd>& x);

enum class WeightingRule { cv_geometric, fixed_subjective, bic };

std::string to_string(WeightingRule rule);
WeightingRule parse_weighting_rule(const std::string& name);

struct CvSettings {
    std::size_t n_holdout = 11;
    std::size_t reps = 10;
};

/// Candidates generated by ordering variables with modified LARS and taking
/// the lowest-BIC prefixes of the order.
struct LarsRecipe {
    std::vector<std::string> main_effects;
    std::vector<std::string> forced_in;
    LarsOptions options;
    std::size_t n_models = 4;
};

struct AnalystProgram {
    std::string id;
    std::string description;
    std::vector<DesignSpec> candidates;
    std::optional<LarsRecipe> lars;  // replaces `candidates` when set
    WeightingRule rule = WeightingRule::bic;
    std::vector<double> fixed_weights;  // fixed_subjective only
    CvSettings cv;
    PriorSettings prior;
    /// Center and scale features on the analyst's own rows before fitting.
    bool standardize = true;
    ResponseSpec response;
    std::uint64_t seed = 0;

    void validate() const;
};

void to_json(nlohmann::json& j, const AnalystProgram& p);
void from_json(const nlohmann::json& j, AnalystProgram& p);

/// Softmax of per-candidate mean fold log likelihoods (rows: candidates,
/// columns: folds). A row containing -inf gets weight 0.
std::vector<double> geometric_mean_normalize(const Eigen::MatrixXd& fold_log_lik);

struct CvWeights {
    std::vector<double> weights;
    Eigen::MatrixXd fold_log_lik;  // candidates x reps
};

/// Each rep shuffles `rows`, fits every candidate on the first n_train rows
/// and scores the joint predictive density of the next n_holdout rows.
CvWeights cv_geometric_weights(const std::vector<DesignSpec>& candidates, const Dataset& data,
                               std::span<const std::size_t> rows, const PriorSettings& prior, std::size_t n_train,
                               std::size_t n_holdout, std::size_t reps, std::uint64_t seed);

/// Validates and returns the weights verbatim.
std::vector<double> fixed_subjective_weights(std::size_t n_candidates, const std::vector<double>& weights);

/// Weights proportional to exp(-BIC / 2). Failed fits get weight 0.
std::vector<double> bic_weights(const std::vector<GaussianFit>& fits);
std::vector<double> bic_weights(const std::vector<DesignSpec>& candidates, const Dataset& data,
                                std::span<const std::size_t> rows);

/// The lowest-BIC prefixes of a LARS order, in order of increasing length.
std::vector<DesignSpec> lars_candidates(const LarsRecipe& recipe, const ResponseSpec& response, const Dataset& data,
                                        std::span<const std::size_t> rows);

/// Build the analyst's summary from its split. Deterministic in
/// (program, data, rows).
ModelMixture run_analyst(const AnalystProgram& program, const Dataset& data, std::span<const std::size_t> rows);

/// Mixture from fixed specs and weights fitted on `rows` under `prior`.
ModelMixture fit_mixture(const std::vector<DesignSpec>& specs, const std::vector<double>& weights,
                         const PriorSettings& prior, const Dataset& data, std::span<const std::size_t> rows);

}  // namespace bsynth
