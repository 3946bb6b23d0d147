#include <bsynth/data.hpp>
#include <bsynth/nig.hpp>
#include <bsynth/predictive.hpp>
#include <bsynth/rng.hpp>
#include <bsynth/selection.hpp>

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <benchmark/benchmark.h>

namespace {

using namespace bsynth;

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
    }
    return m;
}

void BM_NigUpdate(benchmark::State& state) {
    const auto p = static_cast<Eigen::Index>(state.range(0));
    Rng rng(1);
    const Eigen::MatrixXd x = random_matrix(rng, 10, p);
    const Eigen::VectorXd y = random_matrix(rng, 10, 1);
    const NigPosterior prior(NigPrior::vague(static_cast<std::size_t>(p)));
    for (auto _ : state) benchmark::DoNotOptimize(update_nig(prior, x, y));
}
BENCHMARK(BM_NigUpdate)->Arg(2)->Arg(5)->Arg(10)->Arg(20);

void BM_LogMarginal(benchmark::State& state) {
    const auto p = static_cast<Eigen::Index>(state.range(0));
    Rng rng(2);
    const Eigen::MatrixXd x = random_matrix(rng, 110, p);
    const Eigen::VectorXd y = random_matrix(rng, 110, 1);
    const NigPosterior post(NigPrior::vague(static_cast<std::size_t>(p)));
    for (auto _ : state) benchmark::DoNotOptimize(log_marginal_likelihood(post, x, y));
}
BENCHMARK(BM_LogMarginal)->Arg(2)->Arg(10);

// A synthesis-sized predictive for log ozone.
PredictiveDistribution mixture(std::size_t k, double dof) {
    PredictiveDistribution p;
    for (std::size_t i = 0; i < k; ++i) {
        p.components.push_back({1.0 / static_cast<double>(k), {2.0 + 0.05 * static_cast<double>(i), 0.4, dof}});
    }
    return p;
}

void BM_Discretize(benchmark::State& state) {
    const PredictiveDistribution p = mixture(static_cast<std::size_t>(state.range(0)), 150.0);
    for (auto _ : state) benchmark::DoNotOptimize(discretize(p));
}
BENCHMARK(BM_Discretize)->Arg(1)->Arg(4)->Arg(16);

void BM_DiscretizeNormal(benchmark::State& state) {
    const PredictiveDistribution p = mixture(static_cast<std::size_t>(state.range(0)), std::numeric_limits<double>::infinity());
    for (auto _ : state) benchmark::DoNotOptimize(discretize(p));
}
BENCHMARK(BM_DiscretizeNormal)->Arg(1)->Arg(16);

void BM_MixtureQuantile(benchmark::State& state) {
    const PredictiveDistribution p = mixture(16, 150.0);
    for (auto _ : state) benchmark::DoNotOptimize(p.quantile(0.95));
}
BENCHMARK(BM_MixtureQuantile);

void BM_ModifiedLars(benchmark::State& state) {
    const Dataset d = synthetic_ozone(330, 7);
    std::vector<std::size_t> rows(110);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const std::vector<std::string> names{"vdht", "wdsp", "hmdt", "sbtp", "ibht", "dgpg", "ibtp", "vsty", "day"};
    LarsOptions opt;
    opt.hierarchy = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(modified_lars_order(d, rows, ResponseSpec{}, names, {"sbtp"}, opt));
}
BENCHMARK(BM_ModifiedLars)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
