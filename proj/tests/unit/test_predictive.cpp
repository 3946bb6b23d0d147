#include <doctest.h>

#include <bsynth/error.hpp>
#include <bsynth/predictive.hpp>
#include <bsynth/rng.hpp>

#include <cmath>
#include <limits>
#include <numbers>

using namespace bsynth;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Student-t density written out directly.
double t_pdf(double x, double loc, double scale, double dof) {
    const double z = (x - loc) / scale;
    return std::exp(std::lgamma(0.5 * (dof + 1)) - std::lgamma(0.5 * dof)) / (std::sqrt(dof * std::numbers::pi) * scale) *
           std::pow(1.0 + z * z / dof, -0.5 * (dof + 1));
}

// Simpson integral of f over [a, b].
template <class F>
double simpson(F&& f, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + h * i);
    return s * h / 3.0;
}

// Posterior predictives have dof near the training size, so the default
// draws keep dof >= 30; heavier tails are exercised against the cap below.
PredictiveDistribution random_mixture(Rng& r, bool normal_only = false, double min_dof = 30.0) {
    PredictiveDistribution p;
    const auto k = 1 + r.below(5);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        WeightedT c;
        c.weight = 0.05 + r.uniform();
        total += c.weight;
        c.dist.location = 0.5 + 3.0 * r.uniform();
        c.dist.scale = 0.05 + 0.6 * r.uniform();
        c.dist.dof = normal_only || r.uniform() < 0.3 ? kInf : min_dof + 200.0 * r.uniform();
        p.components.push_back(c);
    }
    for (auto& c : p.components) c.weight /= total;
    return p;
}

}  // namespace

TEST_CASE("Student-t cdf agrees with the integrated density") {
    const StudentT t{1.0, 0.7, 5.0};
    for (double x : {-2.0, 0.0, 0.9, 1.0, 2.5}) {
        const double integral = simpson([&](double u) { return t_pdf(u, 1.0, 0.7, 5.0); }, -400.0, x, 400000);
        CHECK(t.cdf(x) == doctest::Approx(integral).epsilon(1e-6));
        CHECK(t.cdf(x) + t.survival(x) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::exp(t.log_pdf(x)) == doctest::Approx(t_pdf(x, 1.0, 0.7, 5.0)).epsilon(1e-12));
    }
    const StudentT n{0.0, 2.0, kInf};
    CHECK(n.cdf(2.0) == doctest::Approx(normal_cdf(1.0)).epsilon(1e-14));
    CHECK(n.variance() == 4.0);
    CHECK(StudentT{0.0, 1.0, 4.0}.variance() == doctest::Approx(2.0));
    CHECK(std::isinf(StudentT{0.0, 1.0, 2.0}.variance()));
    CHECK(std::isnan(StudentT{0.0, 1.0, 1.0}.mean()));
}

TEST_CASE("quantiles invert the cdf") {
    Rng r(4);
    for (int i = 0; i < 50; ++i) {
        const PredictiveDistribution p = random_mixture(r);
        for (double q : {0.05, 0.3, 0.5, 0.95}) CHECK(p.cdf(p.quantile(q)) == doctest::Approx(q).epsilon(1e-9));
    }
    const StudentT t{2.0, 0.5, 7.0};
    CHECK(t.survival(t.upper_quantile(1e-12)) == doctest::Approx(1e-12).epsilon(1e-6));
}

TEST_CASE("mixture mean, variance and combine") {
    PredictiveDistribution a{{{0.25, {1.0, 1.0, kInf}}, {0.75, {3.0, 2.0, kInf}}}};
    CHECK(a.mean() == doctest::Approx(2.5));
    CHECK(a.variance() == doctest::Approx(0.25 * (1 + 2.25) + 0.75 * (4 + 0.25)));
    const auto c = PredictiveDistribution::combine({a, PredictiveDistribution::single({0.0, 1.0, kInf})}, {0.5, 0.5});
    CHECK(c.components.size() == 3);
    CHECK(c.mean() == doctest::Approx(1.25));
    const auto d = PredictiveDistribution::combine({a, a}, {1.0, 0.0});
    CHECK(d.components.size() == 2);
    CHECK_THROWS_AS(PredictiveDistribution::combine({a}, {0.5, 0.5}), ConfigError);
}

TEST_CASE("validation of mixtures") {
    CHECK_THROWS_AS(PredictiveDistribution{}.validate(), ConfigError);
    CHECK_THROWS_AS((PredictiveDistribution{{{0.5, {0, 1, 3}}}}.validate()), ConfigError);
    CHECK_THROWS_AS((PredictiveDistribution{{{1.0, {0, 0, 3}}}}.validate()), ConfigError);
    CHECK_THROWS_AS((PredictiveDistribution{{{1.0, {0, 1, 0}}}}.validate()), ConfigError);
    CHECK_THROWS_AS((PredictiveDistribution{{{1.0, {0, 1, 3}}, {-0.0001, {0, 1, 3}}}}.validate()), ConfigError);
}

TEST_CASE("discretized mass sums to one on random mixtures") {
    Rng r(10);
    for (int i = 0; i < 300; ++i) {
        const IntegerPredictive ip = discretize(random_mixture(r));
        double total = 0.0;
        for (double m : ip.mass) {
            REQUIRE(m >= 0.0);
            total += m;
        }
        CHECK(std::abs(total - 1.0) <= 1e-9);
        CHECK(ip.truncated_tail < 1e-11);
    }
}

TEST_CASE("heavy tails stop at the support cap and still renormalize") {
    Rng r(12);
    for (int i = 0; i < 100; ++i) {
        const PredictiveDistribution p = random_mixture(r, false, 2.5);
        const IntegerPredictive ip = discretize(p, 1e-12, 5000);
        double total = 0.0;
        for (double m : ip.mass) total += m;
        CHECK(std::abs(total - 1.0) <= 1e-9);
        if (ip.mass.size() == 5001) {
            CHECK(ip.truncated_tail == doctest::Approx(p.survival(std::log(5000.5))).epsilon(1e-6));
        } else {
            CHECK(ip.truncated_tail < 1e-11);
        }
    }
}

TEST_CASE("bins use half-integer edges") {
    const PredictiveDistribution p = PredictiveDistribution::single({std::log(4.0), 0.3, 9.0});
    const IntegerPredictive ip = discretize(p);
    const double f0 = p.cdf(std::log(0.5));
    CHECK(ip.mass[0] == doctest::Approx(f0 / (1.0 - ip.truncated_tail)).epsilon(1e-12));
    for (std::size_t j = 1; j < 10; ++j) {
        const double direct = p.cdf(std::log(j + 0.5)) - p.cdf(std::log(j - 0.5));
        CHECK(ip.mass[j] == doctest::Approx(direct / (1.0 - ip.truncated_tail)).epsilon(1e-9));
    }
}

TEST_CASE("concentrated predictive puts its mass on one integer") {
    const IntegerPredictive ip = discretize(PredictiveDistribution::single({std::log(10.0), 1e-4, kInf}));
    CHECK(ip.mass[10] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ip.prob_exceeds(8) == doctest::Approx(1.0));
    CHECK(ip.prob_exceeds(10) < 1e-12);
    CHECK(predictive_mean_ozone(PredictiveDistribution::single({std::log(8.0), 1e-4, 30.0})) ==
          doctest::Approx(8.0).epsilon(1e-10));
}

TEST_CASE("discretized mean of a lognormal with sigma^2 = 2") {
    // Independent sum over bins with the normal cdf written via erfc.
    const double s = std::sqrt(2.0);
    double oracle = 0.0;
    for (int j = 1; j < 2000000; ++j) {
        oracle += j * (normal_cdf(std::log(j + 0.5) / s) - normal_cdf(std::log(j - 0.5) / s));
    }
    const double m = predictive_mean_ozone(PredictiveDistribution::single({0.0, s, kInf}));
    CHECK(m == doctest::Approx(oracle).epsilon(1e-6));
    // The continuous lognormal mean is e; binning to integers lowers it by
    // about 1.4% at this spread (the 0 bin absorbs (0, 0.5)).
    CHECK(m == doctest::Approx(std::exp(1.0)).epsilon(0.02));
}

TEST_CASE("discretized mean tracks the lognormal mixture mean for moderate scales") {
    Rng r(77);
    for (int i = 0; i < 40; ++i) {
        PredictiveDistribution p;
        p.components = {{0.4, {std::log(5.0) + 2.0 * r.uniform(), 0.1 + 0.3 * r.uniform(), kInf}},
                        {0.6, {std::log(5.0) + 2.0 * r.uniform(), 0.1 + 0.3 * r.uniform(), kInf}}};
        double exact = 0.0;
        for (const auto& c : p.components) {
            exact += c.weight * std::exp(c.dist.location + 0.5 * c.dist.scale * c.dist.scale);
        }
        // Direct quadrature of exp(y) f(y) as a second oracle.
        const double quad = simpson([&](double y) { return std::exp(y + p.log_pdf(y)); }, -5.0, 10.0, 200000);
        CHECK(quad == doctest::Approx(exact).epsilon(1e-8));
        CHECK(predictive_mean_ozone(p) == doctest::Approx(exact).epsilon(0.001));
    }
}

TEST_CASE("diverging exponential moment is reported") {
    CHECK_THROWS_AS(predictive_mean_ozone(PredictiveDistribution::single({1.0, 0.3, 1.0})), NumericError);
}
