#pragma once

#include <cstddef>
#include <cstdint>

#include "pacbayes/bounds.hpp"
#include "pacbayes/gibbs.hpp"
#include "pacbayes/model.hpp"
#include "pacbayes/posterior.hpp"

namespace pacbayes {

struct CoverageReport {
  BoundFamily family;
  std::size_t trials;
  std::size_t violations;
  double violation_rate;
  /// One-sided 95% Clopper-Pearson upper limit on the violation probability.
  double clopper_pearson_upper;
  /// Mean over trials of (bound value - true Gibbs risk).
  double mean_slack;
  double min_slack;
};

/// Exact one-sided upper confidence limit for a binomial proportion.
/// Requires 1 <= trials, violations <= trials and confidence in (0, 1).
double clopper_pearson_upper(std::size_t violations, std::size_t trials, double confidence);

/// Draws `trials` independent training sets of size m, forms the posterior by
/// `rule` after seeing each one, and counts how often the exact true Gibbs
/// risk exceeds the bound. Trial i uses stream (seed, i); per-trial results are
/// reduced in trial order, so the report is identical for any thread count.
CoverageReport coverage_experiment(const DataDistribution& dist, const LossTable& table, const ProbMeasure& prior,
                                   const PosteriorRule& rule, BoundFamily family, const BoundParams& params,
                                   std::size_t m, std::size_t trials, std::uint64_t seed);

}  // namespace pacbayes
