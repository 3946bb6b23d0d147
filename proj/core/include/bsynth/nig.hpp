#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <bsynth/predictive.hpp>

namespace bsynth {

/// Normal-inverse-gamma prior for y = X b + e, e ~ N(0, s2 I):
///   b | s2 ~ N(mean, s2 * scale),   s2 ~ InvGamma(shape, rate).
struct NigPrior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd scale;  // V, symmetric positive definite
    double shape = 0.01;    // a
    double rate = 0.01;     // c

    /// m = 0, V = g I, with the given noise shape and rate.
    static NigPrior vague(std::size_t dimension, double g = 100.0, double shape = 0.01, double rate = 0.01);

    void validate() const;
};

/// Conjugate posterior. Stored in precision form (V^-1) with its Cholesky
/// factor so that updates, marginal likelihoods and predictives share one
/// factorization. Immutable; updates return new values.
class NigPosterior {
public:
    explicit NigPosterior(const NigPrior& prior);

    std::size_t dimension() const noexcept { return static_cast<std::size_t>(mean_.size()); }
    const Eigen::VectorXd& mean() const noexcept { return mean_; }
    const Eigen::MatrixXd& precision() const noexcept { return precision_; }
    /// V = precision^-1.
    Eigen::MatrixXd scale() const;
    double shape() const noexcept { return shape_; }
    double rate() const noexcept { return rate_; }
    std::size_t observations() const noexcept { return observations_; }
    double log_det_precision() const noexcept { return log_det_precision_; }
    const Eigen::LLT<Eigen::MatrixXd>& cholesky() const noexcept { return chol_; }

    /// Student-t predictive for one predictor vector.
    StudentT predictive(const Eigen::VectorXd& x) const;

private:
    NigPosterior() = default;
    void factor();

    Eigen::VectorXd mean_;
    Eigen::MatrixXd precision_;
    Eigen::LLT<Eigen::MatrixXd> chol_;
    double log_det_precision_ = 0.0;
    double shape_ = 0.0;
    double rate_ = 0.0;
    std::size_t observations_ = 0;

    friend NigPosterior update_nig(const NigPosterior&, const Eigen::MatrixXd&, const Eigen::VectorXd&);
};

/// Conjugate update. Zero rows return the input unchanged. Throws
/// NumericError when the updated precision cannot be Cholesky-factored.
NigPosterior update_nig(const NigPosterior& post, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

inline NigPosterior fit_nig(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const NigPrior& prior) {
    return update_nig(NigPosterior(prior), x, y);
}

/// Exact log density of the batch under the multivariate Student-t
/// marginal implied by `post`. Empty batch gives 0.
double log_marginal_likelihood(const NigPosterior& post, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

inline StudentT predictive(const NigPosterior& post, const Eigen::VectorXd& x) { return post.predictive(x); }

/// One joint draw (b, s2) from the NIG distribution.
struct NigDraw {
    Eigen::VectorXd coef;
    double variance = 0.0;
};

class Rng;
std::vector<NigDraw> sample_nig(const NigPosterior& post, std::size_t count, Rng& rng);

/// Gaussian log likelihood of a batch at fixed (b, s2).
double gaussian_log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const NigDraw& draw);

}  // namespace bsynth
