#include <doctest.h>

#include <bsynth/error.hpp>
#include <bsynth/rng.hpp>
#include <bsynth/selection.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "oracles.hpp"

using namespace bsynth;

namespace {

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> r(n);
    std::iota(r.begin(), r.end(), 0);
    return r;
}

ResponseSpec log_y() { return {"y", true}; }

std::size_t position(const LarsOrder& o, const FeatureTransform& t) {
    return static_cast<std::size_t>(std::find(o.order.begin(), o.order.end(), t) - o.order.begin());
}

}  // namespace

TEST_CASE("least squares matches the normal equations") {
    const Dataset d = oracle::log_linear_dataset(60, Eigen::Vector3d(0.4, -0.3, 0.0), 2.0, 0.5, 3);
    DesignSpec spec;
    spec.response = log_y();
    spec.features = {FeatureTransform::identity("x1"), FeatureTransform::identity("x2"),
                     FeatureTransform::quadratic("x3")};
    const auto rows = all_rows(60);
    const Design design = build_design(d, spec, rows);
    const GaussianFit fit = fit_gaussian_ml(design);
    const Eigen::VectorXd ref = oracle::ols_normal_equations(design.x, design.y);
    CHECK((fit.coef - ref).cwiseAbs().maxCoeff() < 1e-10);
    const double rss = (design.y - design.x * ref).squaredNorm();
    CHECK(fit.rss == doctest::Approx(rss).epsilon(1e-12));
    CHECK(fit.n == 60);
    CHECK(fit.p == 4);
}

TEST_CASE("information criteria by hand") {
    GaussianFit f;
    f.n = 20;
    f.p = 3;
    f.rss = 5.0;
    const double ll = -10.0 * (std::log(2.0 * std::numbers::pi * 0.25) + 1.0);
    CHECK(f.log_likelihood() == doctest::Approx(ll).epsilon(1e-14));
    CHECK(f.aic() == doctest::Approx(-2.0 * ll + 8.0).epsilon(1e-14));
    CHECK(f.bic() == doctest::Approx(-2.0 * ll + 4.0 * std::log(20.0)).epsilon(1e-14));
    CHECK(f.mse_hat() == doctest::Approx(5.0 / 17.0));
    CHECK(information_criterion(f, Criterion::aic) == f.aic());
    CHECK(information_criterion(f, Criterion::bic) == f.bic());
}

TEST_CASE("degenerate least squares problems are numeric errors") {
    Eigen::MatrixXd v(5, 3);
    v << 1, 2, 1, 2, 4, 2, 3, 6, 4, 4, 8, 3, 5, 10, 6;
    const Dataset d({"a", "b", "y"}, v);
    DesignSpec spec;
    spec.response = log_y();
    spec.features = {FeatureTransform::identity("a"), FeatureTransform::identity("b")};
    CHECK_THROWS_AS(fit_gaussian_ml(build_design(d, spec)), NumericError);
    spec.features = {FeatureTransform::identity("a")};
    const std::vector<std::size_t> two{0, 1};
    CHECK_THROWS_AS(fit_gaussian_ml(build_design(d, spec, two)), NumericError);
}

TEST_CASE("forward selection keeps the signal and drops noise") {
    Eigen::VectorXd beta(6);
    beta << 0.8, 0.0, -0.6, 0.0, 0.0, 0.0;
    const Dataset d = oracle::log_linear_dataset(300, beta, 1.0, 0.3, 11);
    std::vector<FeatureTransform> cands;
    for (const auto& name : oracle::x_names(6)) cands.push_back(FeatureTransform::identity(name));
    const auto rows = all_rows(300);
    const IcModel m = forward_selection_ic(d, rows, cands, Criterion::bic, log_y());
    REQUIRE(m.spec.features.size() >= 2);
    CHECK(m.spec.features[0] == FeatureTransform::identity("x1"));
    CHECK(m.spec.features[1] == FeatureTransform::identity("x3"));
    CHECK(m.path.size() == m.spec.features.size() + 1);
    for (std::size_t i = 1; i < m.path.size(); ++i) CHECK(m.path[i] < m.path[i - 1]);
    // Its final value is the criterion of the refitted selected model.
    const GaussianFit refit = fit_gaussian_ml(build_design(d, m.spec, rows));
    CHECK(m.path.back() == doctest::Approx(refit.bic()).epsilon(1e-12));
    // No remaining candidate improves the criterion.
    for (const auto& c : cands) {
        if (std::find(m.spec.features.begin(), m.spec.features.end(), c) != m.spec.features.end()) continue;
        DesignSpec trial = m.spec;
        trial.features.push_back(c);
        CHECK(fit_gaussian_ml(build_design(d, trial, rows)).bic() >= m.path.back());
    }
    const double expected = refit.coef.dot(feature_vector(d, m.spec, 7));
    CHECK(m.predict(d, 7) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("forward selection offers interactions only after both parents") {
    Eigen::MatrixXd v(200, 3);
    Rng r(5);
    for (int i = 0; i < 200; ++i) {
        const double a = r.normal(), b = r.normal();
        v(i, 0) = a;
        v(i, 1) = b;
        v(i, 2) = std::exp(1.0 + 0.5 * a + 0.4 * b + 0.9 * a * b + 0.2 * r.normal());
    }
    const Dataset d({"a", "b", "y"}, v);
    const std::vector<FeatureTransform> cands = {FeatureTransform::interaction("a", "b"),
                                                 FeatureTransform::identity("a"), FeatureTransform::identity("b")};
    const IcModel m = forward_selection_ic(d, all_rows(200), cands, Criterion::aic, log_y());
    const auto pos = [&](const FeatureTransform& t) {
        return std::find(m.spec.features.begin(), m.spec.features.end(), t) - m.spec.features.begin();
    };
    REQUIRE(pos(cands[0]) < static_cast<long>(m.spec.features.size()));
    CHECK(pos(cands[0]) > pos(cands[1]));
    CHECK(pos(cands[0]) > pos(cands[2]));
}

TEST_CASE("LARS order matches textbook LARS without forcing or derived terms") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        Rng r(seed);
        Eigen::VectorXd beta(6);
        for (Eigen::Index j = 0; j < 6; ++j) beta(j) = r.normal();
        const Dataset d = oracle::log_linear_dataset(50, beta, 0.5, 0.7, seed * 13);
        const auto rows = all_rows(50);
        Eigen::MatrixXd x(50, 6);
        Eigen::VectorXd y(50);
        for (Eigen::Index i = 0; i < 50; ++i) {
            for (Eigen::Index j = 0; j < 6; ++j) x(i, j) = d(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            y(i) = std::log(d(static_cast<std::size_t>(i), 6));
        }
        const auto expected = oracle::classic_lars_order(x, y);
        LarsOptions opt;
        opt.hierarchy = false;
        opt.squares = false;
        opt.interactions = false;
        const LarsOrder got = modified_lars_order(d, rows, log_y(), oracle::x_names(6), {}, opt);
        REQUIRE(got.order.size() == expected.size());
        for (std::size_t k = 0; k < expected.size(); ++k) {
            CHECK(got.order[k] == FeatureTransform::identity("x" + std::to_string(expected[k] + 1)));
        }
    }
}

TEST_CASE("forced variables enter first in the stated order") {
    Eigen::VectorXd beta(5);
    beta << 1.0, 0.5, 0.0, 0.0, 0.05;
    const Dataset d = oracle::log_linear_dataset(80, beta, 0.0, 0.3, 8);
    const LarsOrder o = modified_lars_order(d, all_rows(80), log_y(), oracle::x_names(5), {"x5", "x4"});
    REQUIRE(o.order.size() >= 3);
    CHECK(o.order[0] == FeatureTransform::identity("x5"));
    CHECK(o.order[1] == FeatureTransform::identity("x4"));
    // The strongest free signal leads after forcing.
    CHECK(o.order[2] == FeatureTransform::identity("x1"));
    CHECK_THROWS_AS(modified_lars_order(d, all_rows(80), log_y(), oracle::x_names(5), {"x9"}), ConfigError);
}

TEST_CASE("hierarchy holds for every derived term on random problems") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        Rng r(seed);
        Eigen::VectorXd beta(5);
        for (Eigen::Index j = 0; j < 5; ++j) beta(j) = r.uniform() < 0.5 ? 0.0 : r.normal();
        const Dataset d = oracle::log_linear_dataset(60, beta, 0.0, 0.5, seed + 100);
        const LarsOrder o = modified_lars_order(d, all_rows(60), log_y(), oracle::x_names(5), {});
        // 5 mains + 5 squares + 10 interactions, all entering before rank runs out.
        CHECK(o.order.size() == 20);
        for (std::size_t k = 0; k < o.order.size(); ++k) {
            const auto& t = o.order[k];
            if (t.kind == TransformKind::identity) continue;
            CHECK(position(o, FeatureTransform::identity(t.column)) < k);
            if (t.kind == TransformKind::interaction) CHECK(position(o, FeatureTransform::identity(t.column2)) < k);
        }
    }
}

TEST_CASE("max_steps caps the order and constant columns are excluded") {
    Eigen::MatrixXd v(30, 3);
    Rng r(2);
    for (int i = 0; i < 30; ++i) {
        v(i, 0) = r.normal();
        v(i, 1) = 4.0;
        v(i, 2) = std::exp(v(i, 0) + 0.1 * r.normal());
    }
    const Dataset d({"a", "c", "y"}, v);
    LarsOptions opt;
    opt.max_steps = 1;
    const LarsOrder o = modified_lars_order(d, all_rows(30), log_y(), {"a", "c"}, {}, opt);
    REQUIRE(o.order.size() == 1);
    CHECK(o.order[0] == FeatureTransform::identity("a"));
    REQUIRE(!o.excluded.empty());
    CHECK(o.excluded[0].find("constant") != std::string::npos);
    CHECK_THROWS_AS(modified_lars_order(d, all_rows(30), log_y(), {"a", "c"}, {"c"}), ConfigError);
    CHECK_THROWS_AS(modified_lars_order(d, all_rows(30), log_y(), {"a", "a"}, {}), ConfigError);
}
