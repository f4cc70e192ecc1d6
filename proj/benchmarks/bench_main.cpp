#include <benchmark/benchmark.h>

#include <vector>

#include "pacbayes/bounds.hpp"
#include "pacbayes/instance.hpp"
#include "pacbayes/processes.hpp"
#include "pacbayes/verify.hpp"

namespace {

using namespace pacbayes;

void BM_BoundTerms(benchmark::State& state) {
  const auto family = kAllBoundFamilies[static_cast<std::size_t>(state.range(0))];
  BoundParams params;
  const BoundTerms terms{0.1, 2.0, 1000, 0.02};
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_bound_terms(family, params, terms));
  state.SetLabel(std::string(to_string(family)));
}
BENCHMARK(BM_BoundTerms)->DenseRange(0, 4);

void BM_XyBruteForce(benchmark::State& state) {
  const std::vector<double> mu(static_cast<std::size_t>(state.range(0)), 0.5);
  const double c2 = 0.25 / (1 + 4.0);
  const double x = 0.5 * xy_lambda_cap(1.0, c2, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(xy_mgf_bruteforce(mu, x, 1.0, c2, 0.5));
}
BENCHMARK(BM_XyBruteForce)->DenseRange(4, 12, 4);

void BM_KlBallSup(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i % 7) / 7.0;
  const auto p = ProbMeasure::uniform(n);
  for (auto _ : state) benchmark::DoNotOptimize(kl_ball_sup(p, v, 1.0));
}
BENCHMARK(BM_KlBallSup)->Range(8, 4096);

void BM_Coverage(benchmark::State& state) {
  const auto inst = generate_instance(InstanceGenOptions{}, 1);
  const auto prior = inst.prior_or_uniform();
  PosteriorRule rule;
  BoundParams params;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        coverage_experiment(inst.space, inst.losses, prior, rule, BoundFamily::catoni, params, 100, 1000, 3));
  }
}
BENCHMARK(BM_Coverage)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
