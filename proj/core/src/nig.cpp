#include <bsynth/nig.hpp>

#include <bsynth/error.hpp>
#include <bsynth/rng.hpp>

#include <cmath>
#include <numbers>

namespace bsynth {

NigPrior NigPrior::vague(std::size_t dimension, double g, double shape, double rate) {
    NigPrior p;
    const auto d = static_cast<Eigen::Index>(dimension);
    p.mean = Eigen::VectorXd::Zero(d);
    p.scale = g * Eigen::MatrixXd::Identity(d, d);
    p.shape = shape;
    p.rate = rate;
    return p;
}

void NigPrior::validate() const {
    if (mean.size() == 0) throw ConfigError("NIG prior: empty mean");
    if (scale.rows() != mean.size() || scale.cols() != mean.size()) {
        throw ConfigError("NIG prior: scale matrix dimension does not match mean");
    }
    if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
        throw ConfigError("NIG prior: shape and rate must be positive and finite");
    }
    if (!scale.isApprox(scale.transpose(), 1e-12)) throw ConfigError("NIG prior: scale matrix not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(scale);
    if (llt.info() != Eigen::Success) throw ConfigError("NIG prior: scale matrix not positive definite");
}

NigPosterior::NigPosterior(const NigPrior& prior) {
    prior.validate();
    mean_ = prior.mean;
    const Eigen::LLT<Eigen::MatrixXd> v_chol(prior.scale);
    precision_ = v_chol.solve(Eigen::MatrixXd::Identity(prior.scale.rows(), prior.scale.cols()));
    precision_ = 0.5 * (precision_ + precision_.transpose());
    shape_ = prior.shape;
    rate_ = prior.rate;
    observations_ = 0;
    factor();
}

void NigPosterior::factor() {
    chol_.compute(precision_);
    if (chol_.info() != Eigen::Success) {
        throw NumericError("NIG posterior: precision matrix is not positive definite (Cholesky failed)");
    }
    const auto diag = chol_.matrixLLT().diagonal();
    if ((diag.array() <= 0.0).any() || !diag.allFinite()) {
        throw NumericError("NIG posterior: precision matrix is numerically singular");
    }
    log_det_precision_ = 2.0 * diag.array().log().sum();
}

Eigen::MatrixXd NigPosterior::scale() const {
    return chol_.solve(Eigen::MatrixXd::Identity(precision_.rows(), precision_.cols()));
}

StudentT NigPosterior::predictive(const Eigen::VectorXd& x) const {
    if (x.size() != mean_.size()) {
        throw ConfigError("predictive: predictor arity " + std::to_string(x.size()) + " != posterior dimension " +
                          std::to_string(mean_.size()));
    }
    const Eigen::VectorXd half = chol_.matrixL().solve(x);
    const double quad = half.squaredNorm();  // x' V x
    StudentT t;
    t.location = x.dot(mean_);
    t.scale = std::sqrt(rate_ / shape_ * (1.0 + quad));
    t.dof = 2.0 * shape_;
    return t;
}

NigPosterior update_nig(const NigPosterior& post, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() != y.size()) {
        throw ConfigError("NIG update: design has " + std::to_string(x.rows()) + " rows but response has " +
                          std::to_string(y.size()));
    }
    if (x.rows() == 0) return post;
    if (static_cast<std::size_t>(x.cols()) != post.dimension()) {
        throw ConfigError("NIG update: design has " + std::to_string(x.cols()) + " columns, posterior dimension " +
                          std::to_string(post.dimension()));
    }
    NigPosterior next;
    next.precision_ = post.precision_;
    next.precision_.noalias() += x.transpose() * x;
    next.factor();
    const Eigen::VectorXd rhs = post.precision_ * post.mean_ + x.transpose() * y;
    next.mean_ = next.chol_.solve(rhs);
    const Eigen::VectorXd resid = y - x * next.mean_;
    const Eigen::VectorXd shift = next.mean_ - post.mean_;
    next.shape_ = post.shape_ + 0.5 * static_cast<double>(x.rows());
    next.rate_ = post.rate_ + 0.5 * (resid.squaredNorm() + shift.dot(post.precision_ * shift));
    next.observations_ = post.observations_ + static_cast<std::size_t>(x.rows());
    return next;
}

double log_marginal_likelihood(const NigPosterior& post, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() != y.size()) throw ConfigError("log marginal: design/response length mismatch");
    if (x.rows() == 0) return 0.0;
    const NigPosterior next = update_nig(post, x, y);
    const double n = static_cast<double>(x.rows());
    return -0.5 * n * std::log(2.0 * std::numbers::pi) +
           0.5 * (post.log_det_precision() - next.log_det_precision()) + post.shape() * std::log(post.rate()) -
           next.shape() * std::log(next.rate()) + std::lgamma(next.shape()) - std::lgamma(post.shape());
}

std::vector<NigDraw> sample_nig(const NigPosterior& post, std::size_t count, Rng& rng) {
    std::vector<NigDraw> draws;
    draws.reserve(count);
    Eigen::VectorXd z(static_cast<Eigen::Index>(post.dimension()));
    for (std::size_t k = 0; k < count; ++k) {
        NigDraw d;
        // s2 ~ InvGamma(a, c)  <=>  1/s2 ~ Gamma(a, rate c)
        d.variance = post.rate() / rng.gamma(post.shape());
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
        // b = m + sqrt(s2) * L^-T z has covariance s2 * precision^-1.
        d.coef = post.mean() + std::sqrt(d.variance) * post.cholesky().matrixU().solve(z);
        draws.push_back(std::move(d));
    }
    return draws;
}

double gaussian_log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const NigDraw& draw) {
    const double n = static_cast<double>(y.size());
    const double rss = (y - x * draw.coef).squaredNorm();
    return -0.5 * n * std::log(2.0 * std::numbers::pi * draw.variance) - 0.5 * rss / draw.variance;
}

}  // namespace bsynth
