#include "pacbayes/compare.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pacbayes/bounds.hpp"
#include "pacbayes/numeric.hpp"
#include "pacbayes/parallel.hpp"
#include "pacbayes/rng.hpp"

namespace pacbayes {

double crossover_threshold(double T_m, double C_r, double C_c, double kl, double delta) {
  if (!(T_m > 0.0)) throw std::invalid_argument("T_m must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  return ((C_r - C_c) * (kl - std::log(delta)) + C_r) / T_m;
}

double aligned_catoni_C(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
  // C/(1-e^{-C}) increases from 1 and exceeds 1 + C/2, so the root lies below 2c.
  return bisect_last_true([c](double C) { return catoni_prefactor(C) <= 1.0 + c; }, 1e-12, 2.0 * c + 1.0,
                          1e-14);
}

SchematicConstants schematic_constants(double c, double h) {
  const double C_align = aligned_catoni_C(c);
  return {12.0 / flatness_rate_constant(c, h), 1.0 / -std::expm1(-C_align)};
}

SweepTable bound_sweep(const DataDistribution& dist, const LossTable& table, const ProbMeasure& prior,
                       const PosteriorRule& rule, const SweepConfig& config) {
  if (config.m_grid.empty()) throw std::invalid_argument("m grid must be nonempty");
  if (config.trials == 0) throw std::invalid_argument("trials must be at least 1");
  if (prior.size() != table.hypothesis_count()) throw std::invalid_argument("prior and loss table differ in size");

  BoundParams catoni_params;
  catoni_params.delta = config.delta;
  catoni_params.catoni_C = aligned_catoni_C(config.c);
  BoundParams flat_params;
  flat_params.delta = config.delta;
  flat_params.c = config.c;
  flat_params.h = config.h;
  flat_params.validate(BoundFamily::flatness);
  const BoundObjective objective{BoundFamily::flatness, flat_params};
  const PointSampler sampler(dist);
  const double shrink = config.c * (1.0 - config.h * config.h);

  struct TrialResult {
    double catoni, flat, T_m, kl;
  };
  const std::size_t rows = config.m_grid.size();
  const std::size_t trials = config.trials;
  std::vector<TrialResult> results(rows * trials);
  parallel_for(rows * trials, [&](std::size_t k) {
    const std::size_t r = k / trials;
    const std::size_t j = k % trials;
    const std::size_t m = config.m_grid[r];
    if (m == 0) throw std::invalid_argument("m grid entries must be positive");
    const Sample s = sampler.draw(m, derive_stream(derive_stream(config.seed, r), j));
    const ProbMeasure q = apply_posterior_rule(rule, objective, prior, table, s);
    const double kl = kl_divergence(q, prior);
    const double emp = gibbs_empirical_risk(q, table, s);
    const double flat = flatness(q, table, s, config.h).value;
    const double quad = quadratic_empirical_risk(q, table, s);
    results[k] = {evaluate_bound_terms(BoundFamily::catoni, catoni_params, {emp, kl, m}).value,
                  evaluate_bound_terms(BoundFamily::flatness, flat_params, {emp, kl, m, flat}).value,
                  shrink * quad, kl};
  });

  SweepTable table_out{{}, std::numeric_limits<double>::infinity(), catoni_params.catoni_C, 0.0, 0.0};
  double T_total = 0.0;
  double kl_total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    SweepRow row{config.m_grid[r], 0.0, 0.0, 0.0, 0.0, false};
    for (std::size_t j = 0; j < trials; ++j) {
      const auto& t = results[r * trials + j];
      row.catoni_mean += t.catoni;
      row.flatness_mean += t.flat;
      row.T_m_mean += t.T_m;
      row.kl_mean += t.kl;
    }
    T_total += row.T_m_mean;
    kl_total += row.kl_mean;
    const double n = static_cast<double>(trials);
    row.catoni_mean /= n;
    row.flatness_mean /= n;
    row.T_m_mean /= n;
    row.kl_mean /= n;
    row.crossover_flag = row.flatness_mean < row.catoni_mean;
    if (row.crossover_flag && std::isinf(table_out.crossover_m)) {
      table_out.crossover_m = static_cast<double>(row.m);
    }
    table_out.rows.push_back(row);
  }
  const double all = static_cast<double>(rows * trials);
  table_out.T_m_mean = T_total / all;
  table_out.kl_mean = kl_total / all;
  return table_out;
}

}  // namespace pacbayes
