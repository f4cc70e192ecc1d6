#include "pacbayes/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pacbayes/rng.hpp"

namespace pacbayes {

namespace {

constexpr double kSumTolerance = 1e-12;

void check_hypothesis(const LossTable& table, std::size_t f) {
  if (f >= table.hypothesis_count()) {
    throw std::invalid_argument("hypothesis index " + std::to_string(f) + " out of range (" +
                                std::to_string(table.hypothesis_count()) + " hypotheses)");
  }
}

}  // namespace

DataDistribution::DataDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("data distribution needs at least one point");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("point probabilities must lie in [0, 1]");
    total += p;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw std::invalid_argument("point probabilities must sum to 1");
  }
}

LossTable::LossTable(std::size_t hypothesis_count, std::size_t point_count, std::vector<double> row_major)
    : hypotheses_(hypothesis_count), points_(point_count), loss_(std::move(row_major)), binary_(true) {
  if (hypotheses_ == 0 || points_ == 0) throw std::invalid_argument("loss table must be nonempty");
  if (loss_.size() != hypotheses_ * points_) {
    throw std::invalid_argument("loss table has " + std::to_string(loss_.size()) + " entries, expected " +
                                std::to_string(hypotheses_ * points_));
  }
  for (double v : loss_) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("loss values must lie in [0, 1]");
    if (v != 0.0 && v != 1.0) binary_ = false;
  }
}

LossTable LossTable::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("loss table must be nonempty");
  const std::size_t n = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * n);
  for (const auto& r : rows) {
    if (r.size() != n) throw std::invalid_argument("loss table rows differ in length");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return LossTable(rows.size(), n, std::move(flat));
}

std::span<const double> LossTable::row(std::size_t f) const {
  check_hypothesis(*this, f);
  return std::span<const double>(loss_).subspan(f * points_, points_);
}

Sample::Sample(std::vector<std::size_t> indices, std::uint64_t seed_record)
    : indices_(std::move(indices)), seed_(seed_record) {
  if (indices_.empty()) throw std::invalid_argument("sample must contain at least one point");
}

std::vector<std::size_t> Sample::counts(std::size_t point_count) const {
  std::vector<std::size_t> c(point_count, 0);
  for (std::size_t z : indices_) {
    if (z >= point_count) throw std::invalid_argument("sample index out of range of the data space");
    ++c[z];
  }
  return c;
}

PointSampler::PointSampler(const DataDistribution& dist) {
  cdf_.reserve(dist.point_count());
  double acc = 0.0;
  for (double p : dist.probs()) {
    acc += p;
    cdf_.push_back(acc);
  }
}

std::size_t PointSampler::point(double u01) const noexcept {
  const double u = u01 * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) {
    // u landed on the total after rounding; take the last point with mass.
    it = std::prev(cdf_.end());
    while (it != cdf_.begin() && *it == *std::prev(it)) --it;
  }
  return static_cast<std::size_t>(it - cdf_.begin());
}

Sample PointSampler::draw(std::size_t m, std::uint64_t seed) const {
  if (m == 0) throw std::invalid_argument("sample size m must be at least 1");
  CounterRng rng(seed);
  std::vector<std::size_t> idx(m);
  for (auto& z : idx) z = point(rng.uniform01());
  return Sample(std::move(idx), seed);
}

Sample draw_sample(const DataDistribution& dist, std::size_t m, std::uint64_t seed) {
  return PointSampler(dist).draw(m, seed);
}

double true_risk(const LossTable& table, std::size_t f, const DataDistribution& dist) {
  check_hypothesis(table, f);
  if (dist.point_count() != table.point_count()) {
    throw std::invalid_argument("loss table and data distribution disagree on the number of points");
  }
  const auto row = table.row(f);
  const auto p = dist.probs();
  double r = 0.0;
  for (std::size_t z = 0; z < row.size(); ++z) r += p[z] * row[z];
  return std::clamp(r, 0.0, 1.0);
}

double empirical_risk(const LossTable& table, std::size_t f, const Sample& s) {
  check_hypothesis(table, f);
  double acc = 0.0;
  for (std::size_t z : s.indices()) {
    if (z >= table.point_count()) throw std::invalid_argument("sample index out of range of the loss table");
    acc += table(f, z);
  }
  return acc / static_cast<double>(s.size());
}

std::vector<double> true_risks(const LossTable& table, const DataDistribution& dist) {
  std::vector<double> r(table.hypothesis_count());
  for (std::size_t f = 0; f < r.size(); ++f) r[f] = true_risk(table, f, dist);
  return r;
}

std::vector<double> empirical_risks(const LossTable& table, const Sample& s) {
  const auto counts = s.counts(table.point_count());
  const double inv_m = 1.0 / static_cast<double>(s.size());
  std::vector<double> r(table.hypothesis_count(), 0.0);
  for (std::size_t f = 0; f < r.size(); ++f) {
    double acc = 0.0;
    for (std::size_t z = 0; z < counts.size(); ++z) {
      if (counts[z] != 0) acc += static_cast<double>(counts[z]) * table(f, z);
    }
    r[f] = acc * inv_m;
  }
  return r;
}

}  // namespace pacbayes
