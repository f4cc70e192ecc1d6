#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pacbayes/bounds.hpp"
#include "pacbayes/gibbs.hpp"
#include "pacbayes/model.hpp"

namespace pacbayes {

/// Tempered posterior: weights proportional to p(f) exp(-beta m Rhat_S(f)).
/// beta = 0 returns p unchanged.
ProbMeasure gibbs_posterior(const ProbMeasure& p, const LossTable& table, const Sample& s, double beta);

struct BoundObjective {
  BoundFamily family;
  BoundParams params;
};

struct OptimizationResult {
  ProbMeasure posterior;
  BoundReport report;
  /// Grid temperature whose posterior seeded the refinement.
  double beta;
  std::size_t accepted_steps;
};

/// Best posterior found for `objective`: evaluates the bound at
/// gibbs_posterior(beta) for every grid beta, then runs refine_steps of
/// exponentiated-gradient steps from the best one, halving the step size
/// whenever a step fails to improve. Ties go to the smaller beta, then to
/// the lexicographically smaller weight vector. The flatness objective is
/// nonconvex, so the result is a best-found point, not a certified optimum.
OptimizationResult minimize_bound(const BoundObjective& objective, const ProbMeasure& p, const LossTable& table,
                                  const Sample& s, std::span<const double> beta_grid, std::size_t refine_steps);

/// Gradient of the objective with respect to the posterior weights (up to an
/// additive constant, which the simplex geometry ignores). Exposed for tests.
std::vector<double> bound_gradient(const BoundObjective& objective, const ProbMeasure& q, const ProbMeasure& p,
                                   const LossTable& table, const Sample& s);

enum class PosteriorRuleKind { fixed, gibbs, bound_minimizer };

/// How a trial turns its sample into a posterior.
struct PosteriorRule {
  PosteriorRuleKind kind = PosteriorRuleKind::gibbs;
  /// Used by `fixed`.
  std::optional<ProbMeasure> fixed;
  /// Used by `gibbs`.
  double beta = 1.0;
  /// Used by `bound_minimizer`.
  std::vector<double> beta_grid = {0.0, 0.1, 0.3, 1.0, 3.0, 10.0};
  std::size_t refine_steps = 20;
};

/// "fixed", "gibbs" or "minimizer"; std::nullopt otherwise.
std::optional<PosteriorRuleKind> parse_posterior_rule(std::string_view id) noexcept;
std::string_view to_string(PosteriorRuleKind kind) noexcept;

/// Applies the rule to a sample. `objective` is only read by bound_minimizer.
ProbMeasure apply_posterior_rule(const PosteriorRule& rule, const BoundObjective& objective, const ProbMeasure& prior,
                                 const LossTable& table, const Sample& s);

}  // namespace pacbayes
