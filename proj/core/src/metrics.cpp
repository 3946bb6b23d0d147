#include <bsynth/metrics.hpp>

#include <bsynth/error.hpp>

#include <string>

namespace bsynth {

namespace {

void same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw ConfigError(std::string(what) + ": " + std::to_string(a) + " predictions for " + std::to_string(b) +
                          " observations");
    }
}

}  // namespace

double sse_log(std::span<const double> predictions, std::span<const double> truth_log) {
    same_length(predictions.size(), truth_log.size(), "sse_log");
    double s = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - truth_log[i];
        s += d * d;
    }
    return s;
}

double mse_ozone_bayes_means(std::span<const double> predictive_means, std::span<const double> truth_ozone) {
    same_length(predictive_means.size(), truth_ozone.size(), "mse_ozone_bayes");
    if (truth_ozone.empty()) throw ConfigError("mse_ozone_bayes: no cases");
    double s = 0.0;
    for (std::size_t i = 0; i < truth_ozone.size(); ++i) {
        const double d = predictive_means[i] - truth_ozone[i];
        s += d * d;
    }
    return s / static_cast<double>(truth_ozone.size());
}

double mse_ozone_bayes(std::span<const IntegerPredictive> predictives, std::span<const double> truth_ozone) {
    std::vector<double> means;
    means.reserve(predictives.size());
    for (const auto& p : predictives) means.push_back(p.mean());
    return mse_ozone_bayes_means(means, truth_ozone);
}

double point_rule_prediction(double yhat, double mse_hat) {
    if (!(mse_hat >= 0.0)) throw ConfigError("point rule: mse_hat must be >= 0");
    return std::exp(yhat + 0.5 * mse_hat);
}

double mse_ozone_pointrule(std::span<const double> yhat, double mse_hat, std::span<const double> truth_ozone) {
    same_length(yhat.size(), truth_ozone.size(), "mse_ozone_pointrule");
    if (truth_ozone.empty()) throw ConfigError("mse_ozone_pointrule: no cases");
    double s = 0.0;
    for (std::size_t i = 0; i < yhat.size(); ++i) {
        const double d = point_rule_prediction(yhat[i], mse_hat) - truth_ozone[i];
        s += d * d;
    }
    return s / static_cast<double>(yhat.size());
}

Exceedance classify_exceedance_bayes(const IntegerPredictive& pred, int threshold) {
    if (threshold < 0) throw ConfigError("exceedance threshold must be >= 0");
    return pred.prob_exceeds(static_cast<std::size_t>(threshold)) > 0.5 ? Exceedance::exceed : Exceedance::not_exceed;
}

Exceedance classify_exceedance_point(double yhat, int threshold) {
    return yhat > std::log(threshold + 0.5) ? Exceedance::exceed : Exceedance::not_exceed;
}

ClassificationCounts classification_errors(std::span<const Exceedance> forecasts, std::span<const double> truth_ozone,
                                           int threshold) {
    same_length(forecasts.size(), truth_ozone.size(), "classification_errors");
    ClassificationCounts c;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        const Exceedance truth = observed_exceedance(truth_ozone[i], threshold);
        if (forecasts[i] == Exceedance::exceed && truth == Exceedance::not_exceed) ++c.false_positives;
        if (forecasts[i] == Exceedance::not_exceed && truth == Exceedance::exceed) ++c.false_negatives;
    }
    return c;
}

double interval_coverage(std::span<const PredictiveDistribution> predictives, std::span<const double> truth_log,
                         double level) {
    same_length(predictives.size(), truth_log.size(), "interval_coverage");
    if (!(level > 0.0 && level <= 1.0)) throw ConfigError("interval_coverage: level must be in (0, 1]");
    if (predictives.empty()) throw ConfigError("interval_coverage: no cases");
    const double tail = 0.5 * (1.0 - level);
    std::size_t covered = 0;
    for (std::size_t i = 0; i < predictives.size(); ++i) {
        const double lo = predictives[i].quantile(tail);
        const double hi = predictives[i].quantile(1.0 - tail);
        if (truth_log[i] >= lo && truth_log[i] <= hi) ++covered;
    }
    return 100.0 * static_cast<double>(covered) / static_cast<double>(predictives.size());
}

Calibration calibration_summary(std::span<const PredictiveDistribution> predictives, std::span<const double> truth_log) {
    same_length(predictives.size(), truth_log.size(), "calibration_summary");
    if (predictives.empty()) throw ConfigError("calibration_summary: no cases");
    Calibration c;
    for (std::size_t i = 0; i < predictives.size(); ++i) {
        c.avg_var += predictives[i].variance();
        const double d = predictives[i].mean() - truth_log[i];
        c.mse += d * d;
    }
    const double n = static_cast<double>(predictives.size());
    c.avg_var /= n;
    c.mse /= n;
    c.optimism = c.mse / c.avg_var;
    return c;
}

}  // namespace bsynth
