#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include <bsynth/analysts.hpp>
#include <bsynth/data.hpp>
#include <bsynth/nig.hpp>
#include <bsynth/predictive.hpp>

namespace bsynth {

class Rng;

/// log(N^-1 sum_j exp(ll_j)) by log-sum-exp. All -inf gives -inf with a
/// warning.
double mc_log_marginal(std::span<const double> draw_log_likelihoods);

/// Draw-average marginal likelihood for any draw type and likelihood.
template <class Draw, class LogLik>
double mc_log_marginal(std::span<const Draw> draws, LogLik&& log_likelihood) {
    std::vector<double> ll;
    ll.reserve(draws.size());
    for (const auto& d : draws) ll.push_back(log_likelihood(d));
    return mc_log_marginal(std::span<const double>(ll));
}

/// Monte Carlo marginal of a batch under a conjugate posterior using
/// `draws` joint (b, s2) draws.
double mc_log_marginal(const NigPosterior& post, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       std::size_t draws, Rng& rng);

/// How a model's marginal likelihood on evaluation data is computed.
struct MarginalMethod {
    enum class Kind { analytic, monte_carlo };
    Kind kind = Kind::analytic;
    std::size_t draws = 100'000;
    std::uint64_t seed = 0;
};

/// Mixture marginal: analytic per component, or draw-based per component
/// (components use seeds derived from `method.seed`).
double model_log_marginal(const ModelMixture& mix, const Dataset& data, std::span<const std::size_t> rows,
                          const MarginalMethod& method = {});

/// Throws ProvenanceError unless every model absorbed the same rows and the
/// evaluation rows are disjoint from them.
void check_common_provenance(const std::vector<const ModelMixture*>& models, std::span<const std::size_t> eval_rows);

/// log m_i(eval) - log m_j(eval).
double pairwise_log_bf(const ModelMixture& model_i, const ModelMixture& model_j, const Dataset& data,
                       std::span<const std::size_t> eval_rows, const MarginalMethod& method = {});

struct BayesFactorMatrix {
    Eigen::MatrixXd log_bf;            // L[i][j] = log B_ij
    std::vector<double> log_marginals;  // the generating vector, when known
    std::vector<std::size_t> eval_rows;
    std::vector<std::size_t> absorbed;

    std::size_t k() const noexcept { return static_cast<std::size_t>(log_bf.rows()); }
};

/// L[i][j] = lm[i] - lm[j]; exactly antisymmetric with zero diagonal.
BayesFactorMatrix bf_matrix_from_log_marginals(const std::vector<double>& log_marginals);

BayesFactorMatrix bf_matrix(const std::vector<ModelMixture>& models, const Dataset& data,
                            std::span<const std::size_t> eval_rows, const MarginalMethod& method = {});

enum class SynthesisMode { bayesian, convex };

std::string to_string(SynthesisMode mode);

struct SynthesisWeights {
    SynthesisMode mode = SynthesisMode::bayesian;
    std::vector<double> weights;
    /// Unnormalized log weights (row means of the log Bayes factor matrix, or accumulated log marginals).
    std::vector<double> log_raw;
    /// Indices whose normalized weight fell below 1e-300 and was set to 0.
    std::vector<std::size_t> clamped;

    std::size_t k() const noexcept { return weights.size(); }
};

/// Normalize log weights: subtract the max, exponentiate, clamp < 1e-300 to 0.
SynthesisWeights normalize_log_weights(std::vector<double> log_raw, SynthesisMode mode);

/// log b_i = (1/k) sum_l L[i][l], normalized. Works for inconsistent matrices.
SynthesisWeights geometric_mean_weights(const Eigen::MatrixXd& log_bf);
inline SynthesisWeights geometric_mean_weights(const BayesFactorMatrix& m) { return geometric_mean_weights(m.log_bf); }

/// Uniform 1/k unless `fixed` is given (nonnegative, summing to 1 within 1e-9).
SynthesisWeights convex_weights(std::size_t k, const std::optional<std::vector<double>>& fixed = std::nullopt);

/// Bring every model up to the union of the rows any of them absorbed.
/// Missing rows are absorbed in ascending order.
std::vector<ModelMixture> equalize_provenance(const std::vector<ModelMixture>& models, const Dataset& data);

class SynthesizedModel {
public:
    SynthesizedModel(std::vector<ModelMixture> analysts, SynthesisWeights weights);

    const std::vector<ModelMixture>& analysts() const noexcept { return analysts_; }
    const SynthesisWeights& weights() const noexcept { return weights_; }
    /// Rows absorbed by every analyst (common provenance).
    const std::vector<std::size_t>& absorbed() const noexcept { return analysts_.front().absorbed(); }

    PredictiveDistribution predictive(const Dataset& data, std::size_t row) const;
    IntegerPredictive integer_predictive(const Dataset& data, std::size_t row) const;

private:
    std::vector<ModelMixture> analysts_;
    SynthesisWeights weights_;
};

/// Count check plus common-provenance check.
SynthesizedModel synthesize(std::vector<ModelMixture> analysts, SynthesisWeights weights);

struct AbsorbResult {
    SynthesizedModel model;
    std::vector<double> log_marginals;  // per analyst, before the update
};

/// Update every analyst with the batch; in bayesian mode add each analyst's
/// batch log marginal to its log weight.
AbsorbResult absorb_batch(const SynthesizedModel& model, const Dataset& data, std::span<const std::size_t> rows);

struct TrajectoryStep {
    std::size_t batch = 0;
    std::vector<std::size_t> rows;
    std::vector<double> log_marginals;
    std::vector<double> weights_before;
    std::vector<double> weights_after;
};

struct WeightTrajectory {
    SynthesisMode mode = SynthesisMode::bayesian;
    std::vector<double> initial_weights;
    std::vector<TrajectoryStep> steps;
};

struct SequentialResult {
    SynthesizedModel final_model;
    WeightTrajectory trajectory;
    /// One predictive per scheduled row, made before its batch was absorbed.
    std::vector<std::size_t> predicted_rows;
    std::vector<PredictiveDistribution> predictions;
};

/// Predict each batch, then absorb it.
SequentialResult sequential_update(const SynthesizedModel& model, const BatchSchedule& schedule, const Dataset& data);

void to_json(nlohmann::json& j, const SynthesisWeights& w);
void to_json(nlohmann::json& j, const WeightTrajectory& t);
void from_json(const nlohmann::json& j, WeightTrajectory& t);

}  // namespace bsynth
