#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <bsynth/analysts.hpp>
#include <bsynth/metrics.hpp>
#include <bsynth/predictive.hpp>
#include <bsynth/selection.hpp>
#include <bsynth/synthesis.hpp>

namespace bsynth {

/// What a method says about one case before seeing it.
struct Forecast {
    double log_point = 0.0;    // log scale: predictive mean, or the point prediction
    double ozone_point = 0.0;  // original scale: discretized predictive mean, or exp(yhat + MSE/2)
    Exceedance exceed = Exceedance::not_exceed;
    std::optional<PredictiveDistribution> distribution;  // Bayesian methods only
};

Forecast bayesian_forecast(const PredictiveDistribution& pred);
Forecast point_forecast(double yhat, double mse_hat);

/// A prediction method evaluated by the protocols: it forecasts cases and
/// may then absorb them.
class Method {
public:
    virtual ~Method() = default;

    virtual std::string name() const = 0;
    virtual bool bayesian() const = 0;
    virtual Forecast forecast(const Dataset& data, std::size_t row) const = 0;
    virtual void absorb(const Dataset& data, std::span<const std::size_t> rows) = 0;
    /// Whether `row` has already informed the method.
    virtual bool has_seen(std::size_t row) const = 0;
    virtual std::optional<WeightTrajectory> trajectory() const { return std::nullopt; }
};

class AnalystMethod final : public Method {
public:
    AnalystMethod(std::string name, ModelMixture mixture) : name_(std::move(name)), mixture_(std::move(mixture)) {}

    std::string name() const override { return name_; }
    bool bayesian() const override { return true; }
    Forecast forecast(const Dataset& data, std::size_t row) const override;
    void absorb(const Dataset& data, std::span<const std::size_t> rows) override;
    bool has_seen(std::size_t row) const override;
    const ModelMixture& mixture() const noexcept { return mixture_; }

private:
    std::string name_;
    ModelMixture mixture_;
};

class SynthesisMethod final : public Method {
public:
    SynthesisMethod(std::string name, SynthesizedModel model);

    std::string name() const override { return name_; }
    bool bayesian() const override { return true; }
    Forecast forecast(const Dataset& data, std::size_t row) const override;
    void absorb(const Dataset& data, std::span<const std::size_t> rows) override;
    bool has_seen(std::size_t row) const override;
    std::optional<WeightTrajectory> trajectory() const override { return trajectory_; }
    const SynthesizedModel& model() const noexcept { return model_; }

private:
    std::string name_;
    SynthesizedModel model_;
    WeightTrajectory trajectory_;
};

/// AIC/BIC forward selection. Absorbing rows refits the selection on the
/// training rows plus everything absorbed so far.
class IcMethod final : public Method {
public:
    IcMethod(std::string name, Criterion criterion, std::vector<FeatureTransform> candidates, ResponseSpec response,
             const Dataset& data, std::vector<std::size_t> training_rows);

    std::string name() const override { return name_; }
    bool bayesian() const override { return false; }
    Forecast forecast(const Dataset& data, std::size_t row) const override;
    void absorb(const Dataset& data, std::span<const std::size_t> rows) override;
    bool has_seen(std::size_t row) const override;
    const IcModel& model() const noexcept { return model_; }

private:
    void refit(const Dataset& data);

    std::string name_;
    Criterion criterion_;
    std::vector<FeatureTransform> candidates_;
    ResponseSpec response_;
    std::vector<std::size_t> rows_;  // sorted
    IcModel model_;
};

}  // namespace bsynth
