#include "pacbayes/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pacbayes {

namespace {

constexpr double kSumTolerance = 1e-12;

void check_compatible(const ProbMeasure& q, const LossTable& table) {
  if (q.size() != table.hypothesis_count()) {
    throw std::invalid_argument("measure has " + std::to_string(q.size()) + " weights but the loss table has " +
                                std::to_string(table.hypothesis_count()) + " hypotheses");
  }
}

void check_point(const LossTable& table, std::size_t z) {
  if (z >= table.point_count()) throw std::invalid_argument("point index out of range");
}

}  // namespace

ProbMeasure::ProbMeasure(std::vector<double> weights) : w_(std::move(weights)) {
  if (w_.empty()) throw std::invalid_argument("probability measure needs at least one atom");
  double total = 0.0;
  for (double v : w_) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("measure weights must lie in [0, 1]");
    total += v;
  }
  if (std::abs(total - 1.0) > kSumTolerance) throw std::invalid_argument("measure weights must sum to 1");
}

ProbMeasure ProbMeasure::normalized(std::vector<double> weights) {
  double total = 0.0;
  for (double v : weights) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("weights must be finite and nonnegative");
    total += v;
  }
  if (!(total > 0.0)) throw std::invalid_argument("weights must have a positive total");
  for (double& v : weights) v /= total;
  return ProbMeasure(std::move(weights));
}

ProbMeasure ProbMeasure::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform measure needs at least one atom");
  return ProbMeasure(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

ProbMeasure ProbMeasure::point_mass(std::size_t n, std::size_t at) {
  if (at >= n) throw std::invalid_argument("point mass index out of range");
  std::vector<double> w(n, 0.0);
  w[at] = 1.0;
  return ProbMeasure(std::move(w));
}

double kl_divergence(const ProbMeasure& q, const ProbMeasure& p) {
  if (q.size() != p.size()) throw std::invalid_argument("KL divergence needs measures of equal length");
  double kl = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double qi = q[i];
    if (qi == 0.0) continue;
    const double pi = p[i];
    if (pi == 0.0) return kInfiniteKl;
    kl += qi * std::log(qi / pi);
  }
  // Rounding can leave a tiny negative value when q and p nearly coincide.
  return kl < 0.0 ? 0.0 : kl;
}

double gibbs_loss(const ProbMeasure& q, const LossTable& table, std::size_t z) {
  check_compatible(q, table);
  check_point(table, z);
  double g = 0.0;
  for (std::size_t f = 0; f < q.size(); ++f) g += q[f] * table(f, z);
  return g;
}

std::vector<double> gibbs_losses(const ProbMeasure& q, const LossTable& table) {
  check_compatible(q, table);
  std::vector<double> g(table.point_count(), 0.0);
  const auto w = q.weights();
  for (std::size_t f = 0; f < w.size(); ++f) {
    if (w[f] == 0.0) continue;
    for (std::size_t z = 0; z < g.size(); ++z) g[z] += w[f] * table(f, z);
  }
  return g;
}

double gibbs_risk(const ProbMeasure& q, const LossTable& table, const DataDistribution& dist) {
  check_compatible(q, table);
  if (dist.point_count() != table.point_count()) {
    throw std::invalid_argument("loss table and data distribution disagree on the number of points");
  }
  double r = 0.0;
  for (std::size_t f = 0; f < q.size(); ++f) {
    if (q[f] != 0.0) r += q[f] * true_risk(table, f, dist);
  }
  return std::clamp(r, 0.0, 1.0);
}

double gibbs_empirical_risk(const ProbMeasure& q, const LossTable& table, const Sample& s) {
  const auto g = gibbs_losses(q, table);
  const auto counts = s.counts(table.point_count());
  double acc = 0.0;
  for (std::size_t z = 0; z < g.size(); ++z) acc += static_cast<double>(counts[z]) * g[z];
  return std::clamp(acc / static_cast<double>(s.size()), 0.0, 1.0);
}

double quadratic_empirical_risk(const ProbMeasure& q, const LossTable& table, const Sample& s) {
  const auto g = gibbs_losses(q, table);
  const auto counts = s.counts(table.point_count());
  double acc = 0.0;
  for (std::size_t z = 0; z < g.size(); ++z) acc += static_cast<double>(counts[z]) * g[z] * g[z];
  return acc / static_cast<double>(s.size());
}

FlatnessValue flatness(const ProbMeasure& q, const LossTable& table, const Sample& s, double h) {
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("flatness parameter h must lie in (0, 1]");
  const auto g = gibbs_losses(q, table);
  const auto counts = s.counts(table.point_count());
  // Terms for repeated points are identical, so sum per distinct point times multiplicity.
  double acc = 0.0;
  for (std::size_t z = 0; z < g.size(); ++z) {
    if (counts[z] == 0) continue;
    const double centre = (1.0 + h) * g[z];
    double inner = 0.0;
    for (std::size_t f = 0; f < q.size(); ++f) {
      if (q[f] == 0.0) continue;
      const double d = table(f, z) - centre;
      inner += q[f] * d * d;
    }
    acc += static_cast<double>(counts[z]) * inner;
  }
  return {h, acc / static_cast<double>(s.size())};
}

double flatness_alternate(const ProbMeasure& q, const LossTable& table, const Sample& s, double h) {
  if (!(h >= 0.0 && h <= 1.0)) throw std::invalid_argument("flatness parameter h must lie in [0, 1]");
  const auto g = gibbs_losses(q, table);
  const auto counts = s.counts(table.point_count());
  double lin = 0.0;
  double quad = 0.0;
  for (std::size_t z = 0; z < g.size(); ++z) {
    const double c = static_cast<double>(counts[z]);
    lin += c * g[z];
    quad += c * g[z] * g[z];
  }
  const double inv_m = 1.0 / static_cast<double>(s.size());
  return lin * inv_m - (1.0 - h * h) * quad * inv_m;
}

}  // namespace pacbayes
