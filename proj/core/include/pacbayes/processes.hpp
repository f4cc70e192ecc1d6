#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pacbayes/gibbs.hpp"
#include "pacbayes/model.hpp"

namespace pacbayes {

/// Raised when an exact enumeration would exceed its size limit.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two-valued multipliers built from a Rademacher sign e in {-1, +1}:
/// shifted(e) = e - shift_k and scaled(e) = scale_a * e - scale_b.
struct ShiftedRademacherSpec {
  std::size_t m;
  double shift_k = 0.0;
  double scale_a = 1.0;
  double scale_b = 0.0;

  /// shift k = c'/(2 + c') with c' = (c - c2)/(1 + c2).
  static ShiftedRademacherSpec for_matched_catoni(std::size_t m, double c, double c2);
  /// a = (c + c2)/2, b = (c - c2)/2.
  static ShiftedRademacherSpec for_flatness(std::size_t m, double c, double c2);

  [[nodiscard]] double shifted(int sign) const noexcept { return sign - shift_k; }
  [[nodiscard]] double scaled(int sign) const noexcept { return scale_a * sign - scale_b; }
};

/// Monte-Carlo frequency with a 95% Wilson score half-width.
struct TailEstimate {
  double probability;
  std::size_t trials;
  std::size_t hits;
  double wilson_halfwidth;
};

TailEstimate make_tail_estimate(std::size_t hits, std::size_t trials);
double wilson_halfwidth(std::size_t hits, std::size_t trials, double z = 1.959963984540054);

/// sup { E_Q[values] : KL(Q || p) <= kappa }, solved on the exponentially
/// tilted family Q_l ~ p exp(l * values) with l found by bisection.
double kl_ball_sup(const ProbMeasure& p, std::span<const double> values, double kappa);

/// inf over l > 0 of kappa/l + (1/l) log E_p exp(l * values): the grid minimum,
/// refined by golden-section search on the cells adjacent to it. A minimum at
/// the largest grid point also considers the lambda -> inf limit.
double kl_dual_value(const ProbMeasure& p, std::span<const double> values, double kappa,
                     std::span<const double> lambda_grid);

/// n log-spaced points from lo to hi inclusive.
std::vector<double> log_spaced_grid(double lo, double hi, std::size_t n);

/// E_P [ ((1 - R(f)) + cosh(x) e^{-k x} R(f))^m ] with x = lambda/m, i.e. the
/// exact value of E_P E_S E_eps exp(x sum_i (eps_i - k) f(z_i)) for zero-one loss.
/// Throws std::invalid_argument for non-binary tables.
double debias_mgf_exact(const ProbMeasure& p, const LossTable& table, const DataDistribution& dist,
                        double lambda_over_m, double k, std::size_t m);

/// Upper end of the admissible lambda/m range: (h^2 c - c2) / (2 (1 + h^2 c)(1 + c2)).
double xy_lambda_cap(double c, double c2, double h);

/// Adversarial MGF: 2^-m sum over eps in {-1,1}^m of
///   max over Y in {0,1}^m of E_X exp(x sum_i X_i [(eps_i + eps''_i) - eps''_i (1 - h^2) Y_i])
/// with X_i ~ Bernoulli(mu_i) integrated exactly and eps''_i = eps_i (c+c2)/2 - (c-c2)/2.
/// Throws ResourceLimitError when m > 12 and std::invalid_argument when the
/// parameters violate 0 < c2 < h^2 c or 0 < x < xy_lambda_cap, unless force is set.
double xy_mgf_bruteforce(std::span<const double> mu, double lambda_over_m, double c, double c2, double h,
                         bool force = false);

inline constexpr std::size_t kXyMaxDimension = 12;

/// Smallest t for which the shifted-flatness tail is at most 1/2:
/// (1 + c2)(1 + c2 h^2) / (m c2 h^2).
double shifted_flatness_threshold(std::size_t m, double c2, double h);

/// Estimates P_S( R(f) - (1+c2) Rhat_S(f) + c2 (1-h^2) Rhat_S(f^2) >= t/2 ).
TailEstimate shifted_flatness_tail_mc(const LossTable& table, std::size_t f, const DataDistribution& dist,
                                      std::size_t m, double c2, double h, double t, std::size_t trials,
                                      std::uint64_t seed);

enum class SymmetrizationVariant {
  /// sup over the KL ball of E_Q[R(f) - (1+c) Rhat(f)] against the
  /// eps - c'/(2+c') shifted process; the ball sup is exact via kl_ball_sup.
  shifted_kl_ball,
  /// sup over the hypothesis rows of R(f) - (1+c) Rhat(f) + c(1-h^2) Rhat(f^2)
  /// against the scaled-and-shifted quadratic process.
  flatness_rows,
};

struct SymmetrizationParams {
  SymmetrizationVariant variant = SymmetrizationVariant::shifted_kl_ball;
  std::size_t m = 20;
  double kappa = 1.0;
  double c = 1.0;
  double c2 = 0.5;
  double h = 0.5;
};

struct SymmetrizationTail {
  TailEstimate lhs;
  TailEstimate rhs;
  /// Level the symmetrized statistic is compared against (t'/2 or t/4).
  double rhs_level;
  /// False when t is below the shifted-flatness threshold required by the flatness variant.
  bool precondition_met;
};

/// Left- and right-hand tails of the symmetrization-in-deviation inequality
/// (lhs <= 4 rhs). Trial i draws its sample and signs from stream (seed, i).
SymmetrizationTail symmetrization_tail_mc(const DataDistribution& dist, const LossTable& table,
                                          const ProbMeasure& prior, const SymmetrizationParams& params, double t,
                                          std::size_t trials, std::uint64_t seed);

/// Markov step over the KL ball for the matched-Catoni route:
///   4 exp(kappa - lambda t'/(2+c')) E_S E_eps E_P exp((lambda/m) sum_i (eps_i - k) f(z_i))
/// with the expectation evaluated exactly (zero-one loss only).
double markov_shifted_tail_bound(const ProbMeasure& prior, const LossTable& table, const DataDistribution& dist,
                                 std::size_t m, double kappa, double c, double c2, double lambda_over_m, double t);

}  // namespace pacbayes
