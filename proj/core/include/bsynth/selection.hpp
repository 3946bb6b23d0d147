#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <bsynth/data.hpp>
#include <bsynth/design.hpp>

namespace bsynth {

/// Ordinary least squares fit with the Gaussian maximum-likelihood noise
/// variance RSS / n.
struct GaussianFit {
    Eigen::VectorXd coef;
    double rss = 0.0;
    std::size_t n = 0;
    std::size_t p = 0;  // regression coefficients, intercept included

    double log_likelihood() const;
    /// Parameter count includes the noise variance: k = p + 1.
    double aic() const;
    double bic() const;
    /// In-sample mean squared error estimate RSS / (n - p), used by the
    /// exp(y + MSE / 2) back-transform.
    double mse_hat() const;
};

/// Throws NumericError when the design is rank deficient or n <= p.
GaussianFit fit_gaussian_ml(const Design& design);

enum class Criterion { aic, bic };

double information_criterion(const GaussianFit& fit, Criterion criterion);

/// Point-prediction model from greedy forward selection.
struct IcModel {
    DesignSpec spec;
    GaussianFit fit;
    Criterion criterion = Criterion::bic;
    /// Criterion value after each accepted step, starting from the
    /// intercept-only model. Strictly decreasing.
    std::vector<double> path;

    double predict(const Dataset& data, std::size_t row) const;
};

/// Start from the intercept-only model and repeatedly add the candidate that
/// lowers the criterion most; stop when no candidate lowers it. Interaction
/// candidates become available once both parents are selected.
IcModel forward_selection_ic(const Dataset& data, std::span<const std::size_t> rows,
                             const std::vector<FeatureTransform>& candidates, Criterion criterion,
                             const ResponseSpec& response = {});

struct LarsOptions {
    /// Second-order and interaction terms become candidates only once their
    /// parent main effects are active.
    bool hierarchy = true;
    bool squares = true;
    bool interactions = true;
    /// Maximum number of entries; 0 means until candidates are exhausted.
    std::size_t max_steps = 0;
};

struct LarsOrder {
    std::vector<FeatureTransform> order;
    std::vector<std::string> excluded;  // constant or collinear terms, with reason
};

/// Least-angle variable ordering. Forced main effects enter first in the
/// stated order. Each step moves the fit toward the least-squares fit on the
/// active set, which shrinks every active correlation by the same factor
/// (the equiangular LARS direction when active correlations are equal), and
/// the next term enters when its absolute correlation with the residual
/// reaches the largest active one. Ties within 1e-12 go to the lower
/// candidate index (main effects in the given order, then derived terms in
/// order of becoming eligible).
LarsOrder modified_lars_order(const Dataset& data, std::span<const std::size_t> rows,
                              const ResponseSpec& response, const std::vector<std::string>& main_effects,
                              const std::vector<std::string>& forced_in, const LarsOptions& options = {});

}  // namespace bsynth
