#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include <bsynth/data.hpp>

namespace bsynth {

enum class TransformKind {
    identity,
    log,
    quadratic,
    periodic_sine,     // sin(2*pi*(x - phase) / period)
    indicator,         // 1 when x == value
    piecewise_linear,  // max(0, x - knot)
    interaction,       // x * x2
    lagged,            // x at dataset row (r - lag), clamped at row 0
};

struct FeatureTransform {
    TransformKind kind = TransformKind::identity;
    std::string column;
    std::string column2;  // interaction only
    double period = 0.0;
    double phase = 0.0;
    double value = 0.0;
    double knot = 0.0;
    int lag = 0;

    static FeatureTransform identity(std::string column);
    static FeatureTransform log(std::string column);
    static FeatureTransform quadratic(std::string column);
    static FeatureTransform sine(std::string column, double period, double phase = 0.0);
    static FeatureTransform indicator(std::string column, double value);
    static FeatureTransform hinge(std::string column, double knot);
    static FeatureTransform interaction(std::string a, std::string b);
    static FeatureTransform lagged(std::string column, int lag);

    /// Human-readable label, unique per distinct transform.
    std::string label() const;
    double evaluate(const Dataset& data, std::size_t row) const;

    friend bool operator==(const FeatureTransform&, const FeatureTransform&) = default;
};

struct ResponseSpec {
    std::string column = "upo3";
    bool log = true;

    friend bool operator==(const ResponseSpec&, const ResponseSpec&) = default;
};

/// Affine standardization frozen into a DesignSpec: z = (x - center) / scale.
struct ColumnScaling {
    double center = 0.0;
    double scale = 1.0;

    friend bool operator==(const ColumnScaling&, const ColumnScaling&) = default;
};

struct DesignSpec {
    std::vector<FeatureTransform> features;
    bool intercept = true;
    ResponseSpec response;
    /// Empty, or one entry per feature.
    std::vector<ColumnScaling> scaling;

    std::size_t dimension() const noexcept { return features.size() + (intercept ? 1 : 0); }
    std::vector<std::string> labels() const;

    /// No duplicate transforms; interaction parents present as identity
    /// terms; periods positive; scaling arity.
    void validate() const;
    /// validate() plus every referenced column exists in `data`.
    void validate(const Dataset& data) const;

    friend bool operator==(const DesignSpec&, const DesignSpec&) = default;
};

/// Freeze centering/scaling computed on `rows` into the spec. Constant
/// columns keep scale 1. A linear model with intercept is invariant to this
/// reparameterization; it only makes a shared default prior sensible.
DesignSpec standardized(DesignSpec spec, const Dataset& data, std::span<const std::size_t> rows);

struct Design {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;

    Eigen::Index rows() const noexcept { return x.rows(); }
};

/// Predictors in spec order (intercept column first when flagged) and the
/// response (natural log of the response column when response.log).
Design build_design(const Dataset& data, const DesignSpec& spec);
Design build_design(const Dataset& data, const DesignSpec& spec, std::span<const std::size_t> rows);

Eigen::VectorXd feature_vector(const Dataset& data, const DesignSpec& spec, std::size_t row);
double response_value(const Dataset& data, const ResponseSpec& response, std::size_t row);

void to_json(nlohmann::json& j, const FeatureTransform& t);
void from_json(const nlohmann::json& j, FeatureTransform& t);
void to_json(nlohmann::json& j, const DesignSpec& s);
void from_json(const nlohmann::json& j, DesignSpec& s);

}  // namespace bsynth
