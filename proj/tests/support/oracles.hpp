#pragma once

// Reference computations used by the tests. Each one is written from the
// textbook formula with dense linear algebra, independent of the library's
// precision-form / Cholesky code paths.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <bsynth/data.hpp>

namespace bsynth::oracle {

struct DenseNig {
    Eigen::VectorXd mean;
    Eigen::MatrixXd scale;
    double shape = 0.0;
    double rate = 0.0;
};

/// V_n = (V0^-1 + X'X)^-1, m_n = V_n (V0^-1 m0 + X'y), a_n = a0 + n/2,
/// c_n = c0 + (y'y + m0'V0^-1 m0 - m_n'V_n^-1 m_n) / 2, via explicit inverses.
DenseNig dense_posterior(const Eigen::VectorXd& m0, const Eigen::MatrixXd& v0, double a0, double c0,
                         const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Log density of y under the multivariate Student-t with dof 2a, location
/// X m and scale matrix (c / a)(I + X V X'), using an LU determinant.
double mvt_log_density(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& m,
                       const Eigen::MatrixXd& v, double a, double c);

struct Quadrature {
    double log_marginal = 0.0;
    double mean_b = 0.0;  // posterior mean of the coefficient
};

/// Brute-force 2-D quadrature for y = b x + e with b | s2 ~ N(m, s2 v),
/// s2 ~ InvGamma(a, c): composite Simpson over t = log s2 and, for each t,
/// over b.
Quadrature quadrature_1d(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double m, double v, double a, double c,
                         int nodes_t = 2001, int nodes_b = 801);

/// Least squares through the normal equations (LDLT of X'X).
Eigen::VectorXd ols_normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Entry order of plain least angle regression (equiangular direction,
/// no lasso drops) on centered, unit-norm columns and a centered response.
std::vector<std::size_t> classic_lars_order(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Dataset with columns x1..xp drawn i.i.d. N(0, 1) and a response column
/// "y" = exp(intercept + x * beta + sigma * e) (so the log response is
/// linear-Gaussian). beta.size() == p.
Dataset log_linear_dataset(std::size_t n, const Eigen::VectorXd& beta, double intercept, double sigma,
                           std::uint64_t seed);

/// Column names x1..xp.
std::vector<std::string> x_names(std::size_t p);

}  // namespace bsynth::oracle
