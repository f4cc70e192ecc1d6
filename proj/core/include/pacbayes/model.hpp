#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pacbayes {

/// Finite labeled-example space with known probabilities. Because the
/// distribution is known, true risks are exact dot products rather than
/// estimates.
class DataDistribution {
 public:
  /// Throws std::invalid_argument unless probs is nonempty, nonnegative and
  /// sums to 1 within 1e-12.
  explicit DataDistribution(std::vector<double> probs);

  [[nodiscard]] std::size_t point_count() const noexcept { return probs_.size(); }
  [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }
  [[nodiscard]] double operator[](std::size_t z) const { return probs_.at(z); }

 private:
  std::vector<double> probs_;
};

/// The loss class: one row per hypothesis, one column per data point, values in [0, 1].
class LossTable {
 public:
  LossTable(std::size_t hypothesis_count, std::size_t point_count, std::vector<double> row_major);
  static LossTable from_rows(const std::vector<std::vector<double>>& rows);

  [[nodiscard]] std::size_t hypothesis_count() const noexcept { return hypotheses_; }
  [[nodiscard]] std::size_t point_count() const noexcept { return points_; }
  /// True iff every entry is exactly 0 or 1 (zero-one loss).
  [[nodiscard]] bool is_binary() const noexcept { return binary_; }

  [[nodiscard]] double operator()(std::size_t f, std::size_t z) const noexcept {
    return loss_[f * points_ + z];
  }
  [[nodiscard]] std::span<const double> row(std::size_t f) const;
  [[nodiscard]] std::span<const double> data() const noexcept { return loss_; }

 private:
  std::size_t hypotheses_;
  std::size_t points_;
  std::vector<double> loss_;
  bool binary_;
};

/// A training set: indices into the data space, with multiplicity.
class Sample {
 public:
  Sample(std::vector<std::size_t> indices, std::uint64_t seed_record);

  [[nodiscard]] std::size_t size() const noexcept { return indices_.size(); }
  [[nodiscard]] std::span<const std::size_t> indices() const noexcept { return indices_; }
  [[nodiscard]] std::uint64_t seed_record() const noexcept { return seed_; }

  /// Multiplicity of each point of a space with `point_count` points.
  /// Throws std::invalid_argument if an index is out of range.
  [[nodiscard]] std::vector<std::size_t> counts(std::size_t point_count) const;

  friend bool operator==(const Sample&, const Sample&) = default;

 private:
  std::vector<std::size_t> indices_;
  std::uint64_t seed_;
};

/// Inverse-CDF sampler over a DataDistribution; construct once, draw many.
class PointSampler {
 public:
  explicit PointSampler(const DataDistribution& dist);

  /// m i.i.d. draws; the stream is a pure function of `seed`.
  [[nodiscard]] Sample draw(std::size_t m, std::uint64_t seed) const;
  [[nodiscard]] std::size_t point(double u01) const noexcept;

 private:
  std::vector<double> cdf_;
};

/// m i.i.d. categorical draws under dist. Throws std::invalid_argument if m == 0.
Sample draw_sample(const DataDistribution& dist, std::size_t m, std::uint64_t seed);

/// R(f) = sum_z dist(z) loss[f, z].
double true_risk(const LossTable& table, std::size_t f, const DataDistribution& dist);

/// Empirical risk: mean of loss[f, z_i] over the sample, with multiplicity.
double empirical_risk(const LossTable& table, std::size_t f, const Sample& s);

/// true_risk for every hypothesis.
std::vector<double> true_risks(const LossTable& table, const DataDistribution& dist);

/// empirical_risk for every hypothesis, computed from point multiplicities.
std::vector<double> empirical_risks(const LossTable& table, const Sample& s);

}  // namespace pacbayes
