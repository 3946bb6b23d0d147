#include <bsynth/methods.hpp>

#include <bsynth/error.hpp>

#include <algorithm>

namespace bsynth {

Forecast bayesian_forecast(const PredictiveDistribution& pred) {
    pred.validate();
    const IntegerPredictive ip = discretize(pred);
    Forecast f;
    f.log_point = pred.mean();
    if (!std::isfinite(f.log_point)) throw NumericError("forecast: predictive mean is not finite");
    f.ozone_point = ip.mean();
    f.exceed = classify_exceedance_bayes(ip);
    f.distribution = pred;
    return f;
}

Forecast point_forecast(double yhat, double mse_hat) {
    Forecast f;
    f.log_point = yhat;
    f.ozone_point = point_rule_prediction(yhat, mse_hat);
    f.exceed = classify_exceedance_point(yhat);
    return f;
}

Forecast AnalystMethod::forecast(const Dataset& data, std::size_t row) const {
    return bayesian_forecast(mixture_predictive(mixture_, data, row));
}

void AnalystMethod::absorb(const Dataset& data, std::span<const std::size_t> rows) {
    mixture_ = mixture_update(mixture_, data, rows);
}

bool AnalystMethod::has_seen(std::size_t row) const {
    return std::binary_search(mixture_.absorbed().begin(), mixture_.absorbed().end(), row);
}

SynthesisMethod::SynthesisMethod(std::string name, SynthesizedModel model)
    : name_(std::move(name)), model_(std::move(model)) {
    trajectory_.mode = model_.weights().mode;
    trajectory_.initial_weights = model_.weights().weights;
}

Forecast SynthesisMethod::forecast(const Dataset& data, std::size_t row) const {
    return bayesian_forecast(model_.predictive(data, row));
}

void SynthesisMethod::absorb(const Dataset& data, std::span<const std::size_t> rows) {
    TrajectoryStep step;
    step.batch = trajectory_.steps.size();
    step.rows.assign(rows.begin(), rows.end());
    step.weights_before = model_.weights().weights;
    AbsorbResult next = absorb_batch(model_, data, rows);
    step.log_marginals = std::move(next.log_marginals);
    model_ = std::move(next.model);
    step.weights_after = model_.weights().weights;
    trajectory_.steps.push_back(std::move(step));
}

bool SynthesisMethod::has_seen(std::size_t row) const {
    return std::binary_search(model_.absorbed().begin(), model_.absorbed().end(), row);
}

IcMethod::IcMethod(std::string name, Criterion criterion, std::vector<FeatureTransform> candidates,
                   ResponseSpec response, const Dataset& data, std::vector<std::size_t> training_rows)
    : name_(std::move(name)),
      criterion_(criterion),
      candidates_(std::move(candidates)),
      response_(std::move(response)),
      rows_(std::move(training_rows)) {
    std::sort(rows_.begin(), rows_.end());
    refit(data);
}

void IcMethod::refit(const Dataset& data) { model_ = forward_selection_ic(data, rows_, candidates_, criterion_, response_); }

Forecast IcMethod::forecast(const Dataset& data, std::size_t row) const {
    return point_forecast(model_.predict(data, row), model_.fit.mse_hat());
}

void IcMethod::absorb(const Dataset& data, std::span<const std::size_t> rows) {
    if (rows.empty()) return;
    for (std::size_t r : rows) {
        if (has_seen(r)) throw ProvenanceError(name_ + ": row " + std::to_string(r) + " already absorbed");
    }
    rows_.insert(rows_.end(), rows.begin(), rows.end());
    std::sort(rows_.begin(), rows_.end());
    refit(data);
}

bool IcMethod::has_seen(std::size_t row) const { return std::binary_search(rows_.begin(), rows_.end(), row); }

}  // namespace bsynth
