#include "pacbayes/processes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pacbayes/numeric.hpp"
#include "pacbayes/parallel.hpp"
#include "pacbayes/rng.hpp"

namespace pacbayes {

namespace {

void check_values(const ProbMeasure& p, std::span<const double> values) {
  if (values.size() != p.size()) throw std::invalid_argument("values and measure differ in length");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("values must be finite");
  }
}

// log E_p exp(l (v - vmax)) and the tilted mean E_{Q_l}[v].
struct Tilt {
  double log_norm;
  double mean;
};

Tilt tilt(const ProbMeasure& p, std::span<const double> values, double vmax, double lambda) {
  double z = 0.0;
  double zv = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (p[i] == 0.0) continue;
    const double w = p[i] * std::exp(lambda * (values[i] - vmax));
    z += w;
    zv += w * values[i];
  }
  return {std::log(z), zv / z};
}

double support_max(const ProbMeasure& p, std::span<const double> values) {
  double vmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (p[i] > 0.0) vmax = std::max(vmax, values[i]);
  }
  return vmax;
}

std::size_t count_hits(const std::vector<unsigned char>& hits) {
  return static_cast<std::size_t>(std::count(hits.begin(), hits.end(), static_cast<unsigned char>(1)));
}

}  // namespace

ShiftedRademacherSpec ShiftedRademacherSpec::for_matched_catoni(std::size_t m, double c, double c2) {
  const double c_prime = (c - c2) / (1.0 + c2);
  return {m, c_prime / (2.0 + c_prime), 1.0, 0.0};
}

ShiftedRademacherSpec ShiftedRademacherSpec::for_flatness(std::size_t m, double c, double c2) {
  return {m, 0.0, (c + c2) / 2.0, (c - c2) / 2.0};
}

double wilson_halfwidth(std::size_t hits, std::size_t trials, double z) {
  if (trials == 0) throw std::invalid_argument("Wilson interval needs at least one trial");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  return z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
}

TailEstimate make_tail_estimate(std::size_t hits, std::size_t trials) {
  return {static_cast<double>(hits) / static_cast<double>(trials), trials, hits, wilson_halfwidth(hits, trials)};
}

double kl_ball_sup(const ProbMeasure& p, std::span<const double> values, double kappa) {
  check_values(p, values);
  if (!(kappa >= 0.0)) throw std::invalid_argument("KL radius kappa must be nonnegative");

  const double vmax = support_max(p, values);
  double top_mass = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (p[i] == 0.0) continue;
    mean += p[i] * values[i];
    if (values[i] == vmax) top_mass += p[i];
  }
  if (kappa == 0.0) return mean;
  // The tilt path ends at p restricted to the maximizers, at KL distance -log(top_mass).
  const double limit = -std::log(top_mass);
  if (kappa >= limit) return vmax;

  auto kl_at = [&](double lambda) {
    const Tilt t = tilt(p, values, vmax, lambda);
    return lambda * (t.mean - vmax) - t.log_norm;
  };
  double hi = 1.0;
  while (kl_at(hi) < kappa) {
    hi *= 2.0;
    if (hi > 1e300) return vmax;
  }
  double lo = 0.0;
  for (int it = 0; it < 2000 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (kl_at(mid) <= kappa) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return tilt(p, values, vmax, lo).mean;
}

double kl_dual_value(const ProbMeasure& p, std::span<const double> values, double kappa,
                     std::span<const double> lambda_grid) {
  check_values(p, values);
  if (!(kappa >= 0.0)) throw std::invalid_argument("KL radius kappa must be nonnegative");
  if (lambda_grid.empty()) throw std::invalid_argument("lambda grid must be nonempty");
  std::vector<double> grid(lambda_grid.begin(), lambda_grid.end());
  for (double l : grid) {
    if (!(l > 0.0) || !std::isfinite(l)) throw std::invalid_argument("lambda grid must hold positive finite values");
  }
  std::sort(grid.begin(), grid.end());

  const double vmax = support_max(p, values);
  // kappa/l + (1/l) log E_p e^{l v} = vmax + (kappa + log E_p e^{l (v - vmax)}) / l
  auto objective = [&](double lambda) { return vmax + (kappa + tilt(p, values, vmax, lambda).log_norm) / lambda; };

  std::size_t best = 0;
  double best_value = objective(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = objective(grid[i]);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  if (best + 1 == grid.size()) {
    // Minimum at the open end: when kappa >= -log p(argmax), the objective
    // decreases to vmax as lambda -> inf and never goes below it.
    double top_mass = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (p[i] > 0.0 && values[i] == vmax) top_mass += p[i];
    }
    if (kappa + std::log(top_mass) >= 0.0) return vmax;
  }
  if (grid.size() == 1) return best_value;
  // The objective is convex in 1/lambda, hence unimodal along the grid.
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[std::min(best + 1, grid.size() - 1)];
  const double refined = golden_section_minimize(objective, lo, hi);
  return std::min(best_value, objective(refined));
}

std::vector<double> log_spaced_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi >= lo) || n == 0) throw std::invalid_argument("log grid needs 0 < lo <= hi and n >= 1");
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(a + step * static_cast<double>(i));
  g.back() = hi;
  return g;
}

double debias_mgf_exact(const ProbMeasure& p, const LossTable& table, const DataDistribution& dist,
                        double lambda_over_m, double k, std::size_t m) {
  if (!table.is_binary()) throw std::invalid_argument("debias MGF needs a zero-one loss table");
  if (!(lambda_over_m > 0.0)) throw std::invalid_argument("lambda/m must be positive");
  if (m == 0) throw std::invalid_argument("sample size m must be at least 1");
  if (p.size() != table.hypothesis_count()) throw std::invalid_argument("prior and loss table differ in size");
  // cosh(x) e^{-kx} - 1, computed in log space so the boundary k gives exactly 0.
  const double excess = std::expm1(log_cosh(lambda_over_m) - k * lambda_over_m);
  const double md = static_cast<double>(m);
  double value = 0.0;
  for (std::size_t f = 0; f < p.size(); ++f) {
    if (p[f] == 0.0) continue;
    const double r = true_risk(table, f, dist);
    value += p[f] * std::exp(md * std::log1p(r * excess));
  }
  return value;
}

double xy_lambda_cap(double c, double c2, double h) {
  const double h2c = h * h * c;
  return (h2c - c2) / (2.0 * (1.0 + h2c) * (1.0 + c2));
}

double xy_mgf_bruteforce(std::span<const double> mu, double lambda_over_m, double c, double c2, double h,
                         bool force) {
  const std::size_t m = mu.size();
  if (m == 0) throw std::invalid_argument("mu must be nonempty");
  if (m > kXyMaxDimension) {
    throw ResourceLimitError("exhaustive XY enumeration supports m <= " + std::to_string(kXyMaxDimension) +
                             ", got " + std::to_string(m));
  }
  for (double v : mu) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("Bernoulli means must lie in [0, 1]");
  }
  if (!force) {
    if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("h must lie in (0, 1]");
    if (!(c2 > 0.0 && c2 < h * h * c)) throw std::invalid_argument("constraint 0 < c2 < h^2 c violated");
    const double cap = xy_lambda_cap(c, c2, h);
    if (!(lambda_over_m > 0.0 && lambda_over_m < cap)) {
      throw std::invalid_argument("constraint 0 < lambda/m < " + std::to_string(cap) + " violated");
    }
  }

  const auto spec = ShiftedRademacherSpec::for_flatness(m, c, c2);
  const double shrink = 1.0 - h * h;
  // factor[i][s][y]: E_X exp(x X_i [...]) for sign index s (0: -1, 1: +1) and Y_i = y.
  std::vector<std::array<std::array<double, 2>, 2>> factor(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (int s = 0; s < 2; ++s) {
      const int eps = s == 1 ? 1 : -1;
      const double e2 = spec.scaled(eps);
      for (int y = 0; y < 2; ++y) {
        const double exponent = lambda_over_m * ((eps + e2) - e2 * shrink * y);
        factor[i][s][y] = 1.0 - mu[i] + mu[i] * std::exp(exponent);
      }
    }
  }

  const std::uint32_t patterns = 1u << m;
  double total = 0.0;
  for (std::uint32_t eps = 0; eps < patterns; ++eps) {
    double best = 0.0;
    for (std::uint32_t y = 0; y < patterns; ++y) {
      double prod = 1.0;
      for (std::size_t i = 0; i < m; ++i) prod *= factor[i][(eps >> i) & 1u][(y >> i) & 1u];
      best = std::max(best, prod);
    }
    total += best;
  }
  return total / static_cast<double>(patterns);
}

double shifted_flatness_threshold(std::size_t m, double c2, double h) {
  if (m == 0) throw std::invalid_argument("sample size m must be at least 1");
  if (!(c2 > 0.0)) throw std::invalid_argument("c2 must be positive");
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("h must lie in (0, 1]");
  const double h2 = h * h;
  return (1.0 + c2) * (1.0 + c2 * h2) / (static_cast<double>(m) * c2 * h2);
}

TailEstimate shifted_flatness_tail_mc(const LossTable& table, std::size_t f, const DataDistribution& dist,
                                      std::size_t m, double c2, double h, double t, std::size_t trials,
                                      std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("trials must be at least 1");
  if (m == 0) throw std::invalid_argument("sample size m must be at least 1");
  if (!(h >= 0.0 && h <= 1.0)) throw std::invalid_argument("h must lie in [0, 1]");
  const double risk = true_risk(table, f, dist);
  const auto row = table.row(f);
  const PointSampler sampler(dist);
  const double shrink = c2 * (1.0 - h * h);

  std::vector<unsigned char> hit(trials, 0);
  parallel_for(trials, [&](std::size_t i) {
    const Sample s = sampler.draw(m, derive_stream(seed, i));
    double lin = 0.0;
    double quad = 0.0;
    for (std::size_t z : s.indices()) {
      lin += row[z];
      quad += row[z] * row[z];
    }
    const double md = static_cast<double>(m);
    const double stat = risk - (1.0 + c2) * lin / md + shrink * quad / md;
    hit[i] = stat >= t / 2.0 ? 1 : 0;
  });
  return make_tail_estimate(count_hits(hit), trials);
}

SymmetrizationTail symmetrization_tail_mc(const DataDistribution& dist, const LossTable& table,
                                          const ProbMeasure& prior, const SymmetrizationParams& params, double t,
                                          std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("trials must be at least 1");
  if (params.m == 0) throw std::invalid_argument("sample size m must be at least 1");
  if (!(params.c2 > 0.0 && params.c2 < params.c)) throw std::invalid_argument("need 0 < c2 < c");
  if (prior.size() != table.hypothesis_count()) throw std::invalid_argument("prior and loss table differ in size");

  const std::size_t n_f = table.hypothesis_count();
  const std::size_t m = params.m;
  const double md = static_cast<double>(m);
  const double c = params.c;
  const double c2 = params.c2;
  const double shrink = 1.0 - params.h * params.h;
  const auto risks = true_risks(table, dist);
  const PointSampler sampler(dist);

  double rhs_level = 0.0;
  bool precondition = true;
  if (params.variant == SymmetrizationVariant::shifted_kl_ball) {
    if (!(params.kappa >= 0.0)) throw std::invalid_argument("KL radius kappa must be nonnegative");
    rhs_level = t / (2.0 * (1.0 + c2)) / 2.0;
  } else {
    if (!(params.h > 0.0 && params.h <= 1.0)) throw std::invalid_argument("h must lie in (0, 1]");
    rhs_level = t / 4.0;
    precondition = t >= shifted_flatness_threshold(m, c2, params.h);
  }

  std::vector<unsigned char> lhs_hit(trials, 0);
  std::vector<unsigned char> rhs_hit(trials, 0);
  parallel_for(trials, [&](std::size_t i) {
    const std::uint64_t trial_seed = derive_stream(seed, i);
    const Sample s = sampler.draw(m, trial_seed);
    CounterRng sign_rng(derive_stream(trial_seed, 1));
    std::vector<int> eps(m);
    for (auto& e : eps) e = sign_rng.sign();

    std::vector<double> lhs(n_f);
    std::vector<double> rhs(n_f);
    if (params.variant == SymmetrizationVariant::shifted_kl_ball) {
      const auto spec = ShiftedRademacherSpec::for_matched_catoni(m, c, c2);
      const double c_prime = (c - c2) / (1.0 + c2);
      const double scale = 1.0 + c_prime / 2.0;
      for (std::size_t f = 0; f < n_f; ++f) {
        double emp = 0.0;
        double proc = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          const double l = table(f, s.indices()[j]);
          emp += l;
          proc += spec.shifted(eps[j]) * l;
        }
        lhs[f] = risks[f] - (1.0 + c) * emp / md;
        rhs[f] = scale * proc / md;
      }
      lhs_hit[i] = kl_ball_sup(prior, lhs, params.kappa) >= t ? 1 : 0;
      rhs_hit[i] = kl_ball_sup(prior, rhs, params.kappa) >= rhs_level ? 1 : 0;
    } else {
      const double cp = (c + c2) / 2.0;
      const double cpp = (c - c2) / 2.0;
      double lhs_sup = -std::numeric_limits<double>::infinity();
      double rhs_sup = -std::numeric_limits<double>::infinity();
      for (std::size_t f = 0; f < n_f; ++f) {
        if (prior[f] == 0.0) continue;
        double emp = 0.0;
        double emp_sq = 0.0;
        double proc = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          const double l = table(f, s.indices()[j]);
          emp += l;
          emp_sq += l * l;
          proc += eps[j] * ((1.0 + cp) * l - cp * shrink * l * l);
        }
        const double lhs_stat = risks[f] - (1.0 + c) * emp / md + c * shrink * emp_sq / md;
        const double rhs_stat = proc / md - cpp * (emp - shrink * emp_sq) / md;
        lhs_sup = std::max(lhs_sup, lhs_stat);
        rhs_sup = std::max(rhs_sup, rhs_stat);
      }
      lhs_hit[i] = lhs_sup >= t ? 1 : 0;
      rhs_hit[i] = rhs_sup >= rhs_level ? 1 : 0;
    }
  });
  return {make_tail_estimate(count_hits(lhs_hit), trials), make_tail_estimate(count_hits(rhs_hit), trials),
          rhs_level, precondition};
}

double markov_shifted_tail_bound(const ProbMeasure& prior, const LossTable& table, const DataDistribution& dist,
                                 std::size_t m, double kappa, double c, double c2, double lambda_over_m, double t) {
  if (!(c2 > 0.0 && c2 < c)) throw std::invalid_argument("need 0 < c2 < c");
  if (!(kappa >= 0.0)) throw std::invalid_argument("KL radius kappa must be nonnegative");
  const auto spec = ShiftedRademacherSpec::for_matched_catoni(m, c, c2);
  const double c_prime = (c - c2) / (1.0 + c2);
  const double t_prime = t / (2.0 * (1.0 + c2));
  const double lambda = lambda_over_m * static_cast<double>(m);
  const double mgf = debias_mgf_exact(prior, table, dist, lambda_over_m, spec.shift_k, m);
  return 4.0 * std::exp(kappa - lambda * t_prime / (2.0 + c_prime)) * mgf;
}

}  // namespace pacbayes
