#include "pacbayes/verify.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pacbayes/parallel.hpp"
#include "pacbayes/rng.hpp"

namespace pacbayes {

double clopper_pearson_upper(std::size_t violations, std::size_t trials, double confidence) {
  if (trials == 0) throw std::invalid_argument("Clopper-Pearson needs at least one trial");
  if (violations > trials) throw std::invalid_argument("violations cannot exceed trials");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("confidence must lie in (0, 1)");
  if (violations == trials) return 1.0;
  const double a = static_cast<double>(violations) + 1.0;
  const double b = static_cast<double>(trials - violations);
  return boost::math::ibeta_inv(a, b, confidence);
}

CoverageReport coverage_experiment(const DataDistribution& dist, const LossTable& table, const ProbMeasure& prior,
                                   const PosteriorRule& rule, BoundFamily family, const BoundParams& params,
                                   std::size_t m, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("trials must be at least 1");
  if (m == 0) throw std::invalid_argument("sample size m must be at least 1");
  if (prior.size() != table.hypothesis_count()) throw std::invalid_argument("prior and loss table differ in size");
  params.validate(family);
  const BoundObjective objective{family, params};
  const PointSampler sampler(dist);

  std::vector<double> bound(trials);
  std::vector<double> risk(trials);
  parallel_for(trials, [&](std::size_t i) {
    const Sample s = sampler.draw(m, derive_stream(seed, i));
    const ProbMeasure q = apply_posterior_rule(rule, objective, prior, table, s);
    bound[i] = evaluate_bound(family, params, q, prior, table, s).value;
    risk[i] = gibbs_risk(q, table, dist);
  });

  std::size_t violations = 0;
  double slack_sum = 0.0;
  double slack_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trials; ++i) {
    if (risk[i] > bound[i]) ++violations;
    const double slack = bound[i] - risk[i];
    slack_sum += slack;
    slack_min = std::min(slack_min, slack);
  }
  return {family,
          trials,
          violations,
          static_cast<double>(violations) / static_cast<double>(trials),
          clopper_pearson_upper(violations, trials, 0.95),
          slack_sum / static_cast<double>(trials),
          slack_min};
}

}  // namespace pacbayes
