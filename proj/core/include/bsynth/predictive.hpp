#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace bsynth {

/// Location-scale Student-t on the log-response scale. dof = +inf denotes
/// the normal limit.
struct StudentT {
    double location = 0.0;
    double scale = 1.0;
    double dof = std::numeric_limits<double>::infinity();

    double cdf(double x) const;
    double survival(double x) const;
    double log_pdf(double x) const;
    double quantile(double p) const;
    /// Upper quantile: x with survival(x) = q. Accurate for tiny q.
    double upper_quantile(double q) const;
    double mean() const;      // NaN when dof <= 1
    double variance() const;  // +inf when dof <= 2
};

struct WeightedT {
    double weight = 1.0;
    StudentT dist;
};

/// Finite mixture of Student-t components on the log scale.
struct PredictiveDistribution {
    std::vector<WeightedT> components;

    static PredictiveDistribution single(const StudentT& t) { return {{{1.0, t}}}; }
    /// Flatten a weighted mixture of mixtures; zero-weight parts are dropped.
    static PredictiveDistribution combine(const std::vector<PredictiveDistribution>& parts,
                                          const std::vector<double>& weights);

    /// Weights nonnegative summing to 1 (1e-9), scales > 0, dof > 0.
    void validate() const;

    double mean() const;
    double variance() const;
    double cdf(double x) const;
    double survival(double x) const;
    double log_pdf(double x) const;
    /// Solves cdf(x) = p by bracketed root finding between component quantiles.
    double quantile(double p) const;
};

/// Distribution over the nonnegative integers obtained by integrating the
/// log-scale density over half-integer bins: P(0) = F(ln 0.5),
/// P(j) = F(ln(j + 0.5)) - F(ln(j - 0.5)).
struct IntegerPredictive {
    std::vector<double> mass;     // mass[j] = P(O = j), renormalized
    double truncated_tail = 0.0;  // mass beyond the support before renormalization

    double mean() const;
    double variance() const;
    double cdf(std::size_t j) const;
    /// P(O > threshold) = 1 - cdf(threshold).
    double prob_exceeds(std::size_t threshold) const;
};

/// The support ends at the first J whose upper tail F-bar(ln(J + 0.5)) is
/// below `tail_tolerance`, capped at `max_support`; masses are renormalized.
IntegerPredictive discretize(const PredictiveDistribution& pred, double tail_tolerance = 1e-12,
                             std::size_t max_support = 2'000'000);

/// Mean of exp(Y) taken on the discretized distribution (the continuous
/// exponential moment of a Student-t does not exist). Throws NumericError
/// when a positively weighted component has dof <= 1.
double predictive_mean_ozone(const PredictiveDistribution& pred);

}  // namespace bsynth
