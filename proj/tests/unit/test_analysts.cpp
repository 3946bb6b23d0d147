#include <doctest.h>

#include <bsynth/analysts.hpp>
#include <bsynth/config_io.hpp>
#include <bsynth/data.hpp>
#include <bsynth/error.hpp>
#include <bsynth/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"

using namespace bsynth;

namespace {

std::vector<std::size_t> range(std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> r(hi - lo);
    std::iota(r.begin(), r.end(), lo);
    return r;
}

DesignSpec spec_of(std::initializer_list<const char*> names) {
    DesignSpec s;
    s.response = {"y", true};
    for (const char* n : names) s.features.push_back(FeatureTransform::identity(n));
    return s;
}

Dataset toy() {
    Eigen::VectorXd beta(4);
    beta << 0.7, -0.4, 0.0, 0.0;
    return oracle::log_linear_dataset(120, beta, 1.0, 0.4, 21);
}

ModelMixture toy_mixture(const Dataset& d, std::span<const std::size_t> rows) {
    return fit_mixture({spec_of({"x1"}), spec_of({"x1", "x2"}), spec_of({"x3"})}, {0.5, 0.3, 0.2}, PriorSettings{}, d,
                       rows);
}

}  // namespace

TEST_CASE("mixture update obeys the chain rule") {
    const Dataset d = toy();
    const auto train = range(0, 40);
    const ModelMixture m = toy_mixture(d, train);
    const auto b1 = range(40, 55), b2 = range(55, 70), both = range(40, 70);
    const double joint = mixture_log_marginal(m, d, both);
    const ModelMixture m1 = mixture_update(m, d, b1);
    CHECK(mixture_log_marginal(m, d, b1) + mixture_log_marginal(m1, d, b2) == doctest::Approx(joint).epsilon(1e-9));
    const ModelMixture seq = mixture_update(m1, d, b2);
    const ModelMixture batch = mixture_update(m, d, both);
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(seq.weights()[c] == doctest::Approx(batch.weights()[c]).epsilon(1e-9));
        CHECK((seq.components()[c].posterior.mean() - batch.components()[c].posterior.mean()).cwiseAbs().maxCoeff() <
              1e-10);
    }
    // Posterior weights are prior weights times batch marginals.
    const auto lml = component_log_marginals(m, d, both);
    double z = 0.0;
    for (std::size_t c = 0; c < 3; ++c) z += m.weights()[c] * std::exp(lml[c] - joint);
    CHECK(z == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(batch.weights()[c] == doctest::Approx(m.weights()[c] * std::exp(lml[c] - joint)).epsilon(1e-9));
    }
    CHECK(batch.absorbed() == range(0, 70));
}

TEST_CASE("absorbing a row twice is a provenance error") {
    const Dataset d = toy();
    const ModelMixture m = toy_mixture(d, range(0, 30));
    const std::vector<std::size_t> again{29, 30};
    CHECK_THROWS_AS(mixture_update(m, d, again), ProvenanceError);
    CHECK_THROWS_AS(ModelMixture(m.components(), {0.5, 0.6, -0.1}), ConfigError);
    CHECK_THROWS_AS(ModelMixture(m.components(), {0.5, 0.5}), ConfigError);
}

TEST_CASE("mixture predictive combines component predictives") {
    const Dataset d = toy();
    const ModelMixture m = toy_mixture(d, range(0, 50));
    const PredictiveDistribution p = mixture_predictive(m, d, 77);
    REQUIRE(p.components.size() == 3);
    for (std::size_t c = 0; c < 3; ++c) {
        const auto& comp = m.components()[c];
        const StudentT t = comp.posterior.predictive(feature_vector(d, comp.spec, 77));
        CHECK(p.components[c].weight == doctest::Approx(m.weights()[c]));
        CHECK(p.components[c].dist.location == doctest::Approx(t.location));
        CHECK(p.components[c].dist.scale == doctest::Approx(t.scale));
        CHECK(p.components[c].dist.dof == doctest::Approx(t.dof));
    }
}

TEST_CASE("geometric-mean cv weights") {
    Eigen::MatrixXd same(2, 3);
    same << -4, -5, -6, -4, -5, -6;
    const auto w = geometric_mean_normalize(same);
    CHECK(w[0] == doctest::Approx(0.5));
    CHECK(w[1] == doctest::Approx(0.5));

    Eigen::MatrixXd f(3, 4);
    f << -10, -11, -9, -12, -8, -9, -10, -11, -20, -15, -14, -13;
    const auto base = geometric_mean_normalize(f);
    // exp of the mean fold log likelihood, normalized
    const double a = std::exp(-10.5), b = std::exp(-9.5), c = std::exp(-15.5);
    CHECK(base[0] == doctest::Approx(a / (a + b + c)).epsilon(1e-12));
    CHECK(base[1] == doctest::Approx(b / (a + b + c)).epsilon(1e-12));
    // Adding a constant per fold leaves the weights unchanged.
    Eigen::MatrixXd shifted = f;
    shifted.col(1).array() += 300.0;
    shifted.col(3).array() -= 50.0;
    const auto s = geometric_mean_normalize(shifted);
    for (std::size_t i = 0; i < 3; ++i) CHECK(s[i] == doctest::Approx(base[i]).epsilon(1e-12));
    // Permuting candidates permutes the weights.
    Eigen::MatrixXd perm(3, 4);
    perm.row(0) = f.row(2);
    perm.row(1) = f.row(0);
    perm.row(2) = f.row(1);
    const auto p = geometric_mean_normalize(perm);
    CHECK(p[0] == doctest::Approx(base[2]));
    CHECK(p[1] == doctest::Approx(base[0]));
    // A failed fold zeroes the candidate.
    f(2, 1) = -std::numeric_limits<double>::infinity();
    CHECK(geometric_mean_normalize(f)[2] == 0.0);
}

TEST_CASE("cv weights prefer the true model and are seed deterministic") {
    const Dataset d = toy();
    const auto rows = range(0, 110);
    const std::vector<DesignSpec> cands = {spec_of({"x1", "x2"}), spec_of({"x3", "x4"})};
    const CvWeights a = cv_geometric_weights(cands, d, rows, PriorSettings{}, 99, 11, 10, 5);
    const CvWeights b = cv_geometric_weights(cands, d, rows, PriorSettings{}, 99, 11, 10, 5);
    CHECK(a.weights == b.weights);
    CHECK(a.weights[0] > 0.99);
    CHECK(a.fold_log_lik.cols() == 10);
    CHECK_THROWS_AS(cv_geometric_weights(cands, d, rows, PriorSettings{}, 90, 11, 10, 5), ConfigError);
}

TEST_CASE("fixed subjective weights are validated and passed through") {
    CHECK(fixed_subjective_weights(2, {0.25, 0.75}) == std::vector<double>{0.25, 0.75});
    CHECK_THROWS_AS(fixed_subjective_weights(2, {0.5, 0.6}), ConfigError);
    CHECK_THROWS_AS(fixed_subjective_weights(3, {0.5, 0.5}), ConfigError);
    CHECK_THROWS_AS(fixed_subjective_weights(2, {1.5, -0.5}), ConfigError);
}

TEST_CASE("bic weights") {
    const Dataset d = toy();
    const auto rows = range(0, 100);
    const auto w = bic_weights({spec_of({"x1", "x2"}), spec_of({"x1", "x2", "x3", "x4"})}, d, rows);
    CHECK(w[0] > 0.5);
    CHECK(w[0] + w[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(bic_weights({spec_of({"x3"})}, d, rows)[0] == 1.0);
    GaussianFit f1, f2;
    f1.n = f2.n = 50;
    f1.p = f2.p = 2;
    f1.rss = 10.0;
    f2.rss = 12.0;
    const auto h = bic_weights(std::vector<GaussianFit>{f1, f2});
    CHECK(h[0] / h[1] == doctest::Approx(std::exp(-0.5 * (f1.bic() - f2.bic()))).epsilon(1e-12));
}

TEST_CASE("program validation") {
    AnalystProgram p;
    p.id = "a";
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.candidates = {spec_of({"x1"})};
    CHECK_NOTHROW(p.validate());
    p.fixed_weights = {1.0};
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.rule = WeightingRule::fixed_subjective;
    CHECK_NOTHROW(p.validate());
    p.lars = LarsRecipe{};
    CHECK_THROWS_AS(p.validate(), ConfigError);
    CHECK(parse_weighting_rule(to_string(WeightingRule::cv_geometric)) == WeightingRule::cv_geometric);
    CHECK_THROWS_AS(parse_weighting_rule("vote"), ConfigError);
}

TEST_CASE("run_analyst is deterministic and records its rows") {
    const Dataset d = toy();
    AnalystProgram p;
    p.id = "cv";
    p.rule = WeightingRule::cv_geometric;
    p.response = {"y", true};
    p.candidates = {spec_of({"x1"}), spec_of({"x1", "x2"})};
    p.seed = 99;
    const auto rows = range(10, 60);
    const ModelMixture a = run_analyst(p, d, rows);
    const ModelMixture b = run_analyst(p, d, rows);
    CHECK(a.weights() == b.weights());
    CHECK(a.absorbed() == rows);
    CHECK(a.components()[1].posterior.mean() == b.components()[1].posterior.mean());
    p.seed = 100;
    CHECK(run_analyst(p, d, rows).weights() != a.weights());
}

TEST_CASE("shipped analyst programs run on ozone-shaped data") {
    const Dataset d = synthetic_ozone(330, 7);
    const auto rows = range(0, 110);
    for (const char* name : {"analyst_1", "analyst_2", "analyst_3"}) {
        CAPTURE(name);
        const AnalystProgram p =
            load_analyst_program(std::string(BSYNTH_SOURCE_DIR) + "/configs/analysts/" + name + ".yaml");
        const ModelMixture m = run_analyst(p, d, rows);
        CHECK(std::accumulate(m.weights().begin(), m.weights().end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        if (p.lars) {
            CHECK(m.size() == 4);
            // Forced variables appear in every candidate.
            for (const auto& c : m.components()) {
                for (const auto& f : p.lars->forced_in) {
                    CHECK(std::find(c.spec.features.begin(), c.spec.features.end(), FeatureTransform::identity(f)) !=
                          c.spec.features.end());
                }
            }
        }
    }
}

TEST_CASE("program json round trip") {
    AnalystProgram p;
    p.id = "x";
    p.rule = WeightingRule::fixed_subjective;
    p.candidates = {spec_of({"x1"}), spec_of({"x2"})};
    p.fixed_weights = {0.3, 0.7};
    p.response = {"y", true};
    p.seed = 12;
    const nlohmann::json j = p;
    const AnalystProgram q = j.get<AnalystProgram>();
    CHECK(q.id == p.id);
    CHECK(q.rule == p.rule);
    CHECK(q.response == p.response);
    CHECK(q.candidates == p.candidates);
    CHECK(q.fixed_weights == p.fixed_weights);
    CHECK(q.seed == 12);

    AnalystProgram cv = p;
    cv.rule = WeightingRule::cv_geometric;
    cv.fixed_weights.clear();
    cv.cv.reps = 3;
    cv.cv.n_holdout = 4;
    const AnalystProgram cq = nlohmann::json(cv).get<AnalystProgram>();
    CHECK(cq.rule == WeightingRule::cv_geometric);
    CHECK(cq.cv.reps == 3);
    CHECK(cq.cv.n_holdout == 4);
    nlohmann::json bad = j;
    bad["colour"] = "red";
    CHECK_THROWS_AS(bad.get<AnalystProgram>(), ConfigError);
}
