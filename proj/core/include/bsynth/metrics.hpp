#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <bsynth/predictive.hpp>

namespace bsynth {

/// sum (pred - truth)^2, both on the log scale.
double sse_log(std::span<const double> predictions, std::span<const double> truth_log);

/// Mean of (predictive mean - observed ozone)^2.
double mse_ozone_bayes(std::span<const IntegerPredictive> predictives, std::span<const double> truth_ozone);
double mse_ozone_bayes_means(std::span<const double> predictive_means, std::span<const double> truth_ozone);

/// exp(yhat + mse_hat / 2), the lognormal mean back-transform.
double point_rule_prediction(double yhat, double mse_hat);

double mse_ozone_pointrule(std::span<const double> yhat, double mse_hat, std::span<const double> truth_ozone);

enum class Exceedance { not_exceed, exceed };

inline constexpr int kExceedanceThreshold = 8;

/// Observed ozone exceeds the threshold when strictly greater (>= 9 for the
/// integer data).
inline Exceedance observed_exceedance(double ozone, int threshold = kExceedanceThreshold) {
    return ozone > threshold ? Exceedance::exceed : Exceedance::not_exceed;
}

/// exceed iff P(O > threshold) > 0.5; exactly 0.5 is not_exceed.
Exceedance classify_exceedance_bayes(const IntegerPredictive& pred, int threshold = kExceedanceThreshold);

/// exceed iff yhat > log(threshold + 0.5), strictly.
Exceedance classify_exceedance_point(double yhat, int threshold = kExceedanceThreshold);

struct ClassificationCounts {
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;

    std::size_t errors() const noexcept { return false_positives + false_negatives; }
};

ClassificationCounts classification_errors(std::span<const Exceedance> forecasts, std::span<const double> truth_ozone,
                                           int threshold = kExceedanceThreshold);

/// Percentage of log-scale truths inside the central `level` interval of
/// each predictive. Endpoints count as covered. level in (0, 1].
double interval_coverage(std::span<const PredictiveDistribution> predictives, std::span<const double> truth_log,
                         double level = 0.90);

struct Calibration {
    double avg_var = 0.0;   // mean predictive variance, log scale
    double mse = 0.0;       // mean squared error of the predictive mean
    double optimism = 0.0;  // mse / avg_var
};

Calibration calibration_summary(std::span<const PredictiveDistribution> predictives, std::span<const double> truth_log);

}  // namespace bsynth
