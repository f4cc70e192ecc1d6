#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "pacbayes/model.hpp"

namespace pacbayes {

/// A Gibbs classifier: probability weights over the rows of a LossTable.
/// Used for both the prior P and the posterior Q.
class ProbMeasure {
 public:
  /// Throws std::invalid_argument unless weights are nonnegative and sum to 1 within 1e-12.
  explicit ProbMeasure(std::vector<double> weights);

  /// Rescales nonnegative weights with a positive total.
  static ProbMeasure normalized(std::vector<double> weights);
  static ProbMeasure uniform(std::size_t n);
  static ProbMeasure point_mass(std::size_t n, std::size_t at);

  [[nodiscard]] std::size_t size() const noexcept { return w_.size(); }
  [[nodiscard]] std::span<const double> weights() const noexcept { return w_; }
  [[nodiscard]] double operator[](std::size_t f) const { return w_.at(f); }

  friend bool operator==(const ProbMeasure&, const ProbMeasure&) = default;

 private:
  std::vector<double> w_;
};

/// KL(q || p) when q is not absolutely continuous w.r.t. p. Every bound maps
/// it to a vacuous +inf certificate.
inline constexpr double kInfiniteKl = std::numeric_limits<double>::infinity();

/// sum_i q_i log(q_i / p_i) with 0 log(0/.) = 0; kInfiniteKl on a support violation.
double kl_divergence(const ProbMeasure& q, const ProbMeasure& p);

/// G_Q(z) = E_{f~Q} loss[f, z].
double gibbs_loss(const ProbMeasure& q, const LossTable& table, std::size_t z);

/// G_Q(z) for every point of the data space.
std::vector<double> gibbs_losses(const ProbMeasure& q, const LossTable& table);

/// E_{f~Q} R(f), exact.
double gibbs_risk(const ProbMeasure& q, const LossTable& table, const DataDistribution& dist);

/// E_{f~Q} of the empirical risk = mean of G_Q(z_i) over the sample.
double gibbs_empirical_risk(const ProbMeasure& q, const LossTable& table, const Sample& s);

struct FlatnessValue {
  double h;
  double value;
};

/// h-flatness of q on s: (1/m) sum_i E_Q [f(z_i) - (1+h) G_Q(z_i)]^2, by the
/// definitional double sum. Requires h in (0, 1].
FlatnessValue flatness(const ProbMeasure& q, const LossTable& table, const Sample& s, double h);

/// Empirical Gibbs risk minus ((1 - h^2)/m) sum_i G_Q(z_i)^2. Equals flatness()
/// for zero-one loss and bounds it from above for general [0, 1] losses.
/// Accepts h in [0, 1].
double flatness_alternate(const ProbMeasure& q, const LossTable& table, const Sample& s, double h);

/// Mean of G_Q(z_i)^2 over the sample (the quadratic empirical risk).
double quadratic_empirical_risk(const ProbMeasure& q, const LossTable& table, const Sample& s);

}  // namespace pacbayes
