#include "pacbayes/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pacbayes {

namespace {

bool lexicographically_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

struct Candidate {
  ProbMeasure q;
  BoundReport report;
  double beta;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.report.value != b.report.value) return a.report.value < b.report.value;
  if (a.beta != b.beta) return a.beta < b.beta;
  return lexicographically_less(a.q.weights(), b.q.weights());
}

std::optional<ProbMeasure> eg_step(const ProbMeasure& q, std::span<const double> grad, double step) {
  double gmin = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < q.size(); ++f) {
    if (q[f] > 0.0) gmin = std::min(gmin, grad[f]);
  }
  std::vector<double> w(q.size(), 0.0);
  double total = 0.0;
  for (std::size_t f = 0; f < q.size(); ++f) {
    if (q[f] == 0.0) continue;
    w[f] = q[f] * std::exp(-step * (grad[f] - gmin));
    total += w[f];
  }
  if (!(total > 0.0) || !std::isfinite(total)) return std::nullopt;
  for (double& v : w) v /= total;
  return ProbMeasure(std::move(w));
}

}  // namespace

ProbMeasure gibbs_posterior(const ProbMeasure& p, const LossTable& table, const Sample& s, double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("inverse temperature beta must be nonnegative");
  if (p.size() != table.hypothesis_count()) throw std::invalid_argument("prior and loss table differ in size");
  if (beta == 0.0) return p;
  const auto emp = empirical_risks(table, s);
  const double scale = beta * static_cast<double>(s.size());
  // Shift by the smallest risk first so large beta m does not swamp log p.
  double emin = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < p.size(); ++f) {
    if (p[f] != 0.0) emin = std::min(emin, emp[f]);
  }
  std::vector<double> logw(p.size(), -std::numeric_limits<double>::infinity());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < p.size(); ++f) {
    if (p[f] == 0.0) continue;
    logw[f] = std::log(p[f]) - scale * (emp[f] - emin);
    top = std::max(top, logw[f]);
  }
  std::vector<double> w(p.size(), 0.0);
  for (std::size_t f = 0; f < p.size(); ++f) {
    if (p[f] != 0.0) w[f] = std::exp(logw[f] - top);
  }
  return ProbMeasure::normalized(std::move(w));
}

std::vector<double> bound_gradient(const BoundObjective& objective, const ProbMeasure& q, const ProbMeasure& p,
                                   const LossTable& table, const Sample& s) {
  const auto& params = objective.params;
  params.validate(objective.family);
  const std::size_t n = q.size();
  const double md = static_cast<double>(s.size());
  const auto emp = empirical_risks(table, s);
  const double kl = kl_divergence(q, p);

  std::vector<double> dkl(n, 0.0);
  for (std::size_t f = 0; f < n; ++f) {
    if (q[f] > 0.0) dkl[f] = std::log(q[f] / p[f]) + 1.0;
  }

  std::vector<double> g(n, 0.0);
  switch (objective.family) {
    case BoundFamily::mcallester: {
      const double arg = (kl + std::log(md / params.delta)) / (2.0 * (md - 1.0));
      const double k = 1.0 / (2.0 * (md - 1.0)) / (2.0 * std::sqrt(arg));
      for (std::size_t f = 0; f < n; ++f) g[f] = emp[f] + k * dkl[f];
      break;
    }
    case BoundFamily::catoni: {
      const double C = params.catoni_C;
      const double denom = -std::expm1(-C);
      for (std::size_t f = 0; f < n; ++f) g[f] = (C * emp[f] + dkl[f] / md) / denom;
      break;
    }
    case BoundFamily::kst: {
      const double k = kl > 2.0 ? 4.5 / (2.0 * std::sqrt(kl * md)) : 0.0;
      for (std::size_t f = 0; f < n; ++f) g[f] = emp[f] + k * dkl[f];
      break;
    }
    case BoundFamily::matched_catoni: {
      const auto d = derive_matched_catoni_constants(params.c, params.c2_or_default(objective.family), params.delta);
      for (std::size_t f = 0; f < n; ++f) g[f] = (1.0 + params.c) * emp[f] + d.C1 * dkl[f] / md;
      break;
    }
    case BoundFamily::flatness: {
      // flatness = (1/m) sum_i [E_Q f(z_i)^2 - (1 - h^2) G_Q(z_i)^2]; for zero-one
      // loss E_Q f^2 = G_Q, which is the alternate form.
      const double C = flatness_rate_constant(params.c, params.h);
      const double shrink = 1.0 - params.h * params.h;
      const auto G = gibbs_losses(q, table);
      const auto counts = s.counts(table.point_count());
      for (std::size_t f = 0; f < n; ++f) {
        double flat = 0.0;
        for (std::size_t z = 0; z < counts.size(); ++z) {
          if (counts[z] == 0) continue;
          const double l = table(f, z);
          flat += static_cast<double>(counts[z]) * (l * l - 2.0 * shrink * G[z] * l);
        }
        g[f] = emp[f] + params.c * flat / md + 12.0 / (C * md) * dkl[f];
      }
      break;
    }
  }
  return g;
}

OptimizationResult minimize_bound(const BoundObjective& objective, const ProbMeasure& p, const LossTable& table,
                                  const Sample& s, std::span<const double> beta_grid, std::size_t refine_steps) {
  if (beta_grid.empty()) throw std::invalid_argument("beta grid must be nonempty");
  objective.params.validate(objective.family);

  std::optional<Candidate> best;
  for (double beta : beta_grid) {
    ProbMeasure q = gibbs_posterior(p, table, s, beta);
    BoundReport report = evaluate_bound(objective.family, objective.params, q, p, table, s);
    Candidate cand{std::move(q), std::move(report), beta};
    if (!best || better(cand, *best)) best = std::move(cand);
  }

  std::size_t accepted = 0;
  double step = 1.0;
  for (std::size_t it = 0; it < refine_steps && std::isfinite(best->report.value); ++it) {
    const auto grad = bound_gradient(objective, best->q, p, table, s);
    auto next = eg_step(best->q, grad, step);
    if (next) {
      BoundReport report = evaluate_bound(objective.family, objective.params, *next, p, table, s);
      if (report.value < best->report.value) {
        best->q = std::move(*next);
        best->report = std::move(report);
        ++accepted;
        continue;
      }
    }
    step *= 0.5;
  }
  return {std::move(best->q), std::move(best->report), best->beta, accepted};
}

std::optional<PosteriorRuleKind> parse_posterior_rule(std::string_view id) noexcept {
  if (id == "fixed") return PosteriorRuleKind::fixed;
  if (id == "gibbs" || id == "gibbs-posterior") return PosteriorRuleKind::gibbs;
  if (id == "minimizer" || id == "bound-minimizer") return PosteriorRuleKind::bound_minimizer;
  return std::nullopt;
}

std::string_view to_string(PosteriorRuleKind kind) noexcept {
  switch (kind) {
    case PosteriorRuleKind::fixed: return "fixed";
    case PosteriorRuleKind::gibbs: return "gibbs";
    case PosteriorRuleKind::bound_minimizer: return "minimizer";
  }
  return "unknown";
}

ProbMeasure apply_posterior_rule(const PosteriorRule& rule, const BoundObjective& objective, const ProbMeasure& prior,
                                 const LossTable& table, const Sample& s) {
  switch (rule.kind) {
    case PosteriorRuleKind::fixed:
      if (!rule.fixed) throw std::invalid_argument("fixed posterior rule needs a posterior measure");
      if (rule.fixed->size() != table.hypothesis_count()) {
        throw std::invalid_argument("fixed posterior and loss table differ in size");
      }
      return *rule.fixed;
    case PosteriorRuleKind::gibbs:
      return gibbs_posterior(prior, table, s, rule.beta);
    case PosteriorRuleKind::bound_minimizer:
      return minimize_bound(objective, prior, table, s, rule.beta_grid, rule.refine_steps).posterior;
  }
  throw std::invalid_argument("unknown posterior rule");
}

}  // namespace pacbayes
