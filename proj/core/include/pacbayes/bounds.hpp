#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pacbayes/gibbs.hpp"
#include "pacbayes/model.hpp"

namespace pacbayes {

enum class BoundFamily { mcallester, catoni, kst, matched_catoni, flatness };

inline constexpr std::array<BoundFamily, 5> kAllBoundFamilies = {
    BoundFamily::mcallester, BoundFamily::catoni, BoundFamily::kst, BoundFamily::matched_catoni,
    BoundFamily::flatness};

std::string_view to_string(BoundFamily family) noexcept;
/// Accepts the names produced by to_string(); also "matched-catoni".
std::optional<BoundFamily> parse_bound_family(std::string_view name) noexcept;

/// Parameters shared by the bound families. Each family reads only the fields it needs.
struct BoundParams {
  double delta = 0.05;
  /// Catoni's C.
  double catoni_C = 1.0;
  /// Inflation of the empirical risk for the matched-Catoni and flatness bounds.
  double c = 1.0;
  /// Auxiliary constant; defaults to c/2 (matched Catoni) or h^2 c / (1 + 16 h^2 c) (flatness).
  std::optional<double> c2;
  /// Flatness parameter, in (0, 1) for the flatness bound.
  double h = 0.5;

  /// Throws std::invalid_argument if a field used by `family` is out of its domain.
  void validate(BoundFamily family) const;
  [[nodiscard]] double c2_or_default(BoundFamily family) const;
};

/// Values of the constraints at the chosen rate constant of the matched-Catoni bound.
struct MatchedCatoniProvenance {
  double target_ratio;      ///< c'/(c'+2): the admissible ceiling for log cosh(x)/x
  double bisection_root;    ///< root of log cosh(x)/x = target on (1e-12, 10]
  double delta_cap;         ///< 2(1+c2)(2+c')log(4/delta) / ((1+c2)^2/c2)
  bool cap_active;          ///< true when the delta cap, not the root, sets lambda/m
  double ratio_at_choice;   ///< log cosh(lambda/m)/(lambda/m) at the chosen point
  double delta_for_cap;     ///< delta at which the cap was evaluated (pre-peeling)
  double t_prime_scale;     ///< t' = t * t_prime_scale = t / (2(1+c2))
  double shift_k;           ///< Rademacher shift k = c'/(2+c')
};

struct DerivedConstants {
  double lambda_over_m;
  double c_prime;        ///< (c - c2)/(1 + c2)
  double c_doubleprime;  ///< (c - c2)/2
  double C_big;          ///< C' = 2(1+c2)(2+c')/(lambda/m)
  double C1;             ///< 3 C'
  double C2;             ///< C'
  double C3;             ///< C' (3 + log 8)
  MatchedCatoniProvenance provenance;
};

struct NamedValue {
  std::string name;
  double value;
};

/// An evaluated certificate. value == empirical_term + complexity_term + flatness_term.
struct BoundReport {
  BoundFamily family;
  double value;
  double empirical_term;
  double complexity_term;
  double flatness_term;
  std::vector<NamedValue> constants;

  [[nodiscard]] std::optional<double> constant(std::string_view name) const;
};

/// Scalar inputs of a bound evaluation. `flatness` is only read by the flatness family.
struct BoundTerms {
  double empirical_risk;
  double kl;
  std::size_t m;
  double flatness = 0.0;
};

// Closed forms. kl may be kInfiniteKl, in which case the bound is +inf.

/// emp + sqrt((kl + log(m/delta)) / (2(m-1))). Requires m >= 2.
double mcallester_bound(double emp, double kl, std::size_t m, double delta);

/// (C emp + (kl + log(1/delta))/m) / (1 - e^{-C}). Requires C > 0.
double catoni_bound(double emp, double kl, std::size_t m, double delta, double C);

/// C / (1 - e^{-C}): the factor multiplying the empirical risk in Catoni's bound.
double catoni_prefactor(double C);

/// emp + 4.5 sqrt(max(kl, 2)/m) + sqrt(log(1/delta)/m).
double kst_bound(double emp, double kl, std::size_t m, double delta);

/// Explicit constants for the matched-Catoni bound: lambda/m is the largest x
/// with log cosh(x)/x <= c'/(c'+2), capped by the delta constraint.
/// Requires 0 < c2 < c and delta in (0, 1).
DerivedConstants derive_matched_catoni_constants(double c, double c2, double delta);

/// (1+c) emp + C1 kl/m + C2 log(1/delta)/m + C3/m.
double matched_catoni_bound(double emp, double kl, std::size_t m, double delta, double c, double c2);

/// Rate constant of the flatness bound, 2 h^4 c / (1 + 16 h^2 c).
double flatness_rate_constant(double c, double h);

enum class FlatnessRoute { definitional, alternate };

/// emp + c * flat + 4/(C m) [3 kl + log(1/delta) + 5] from precomputed terms.
BoundReport flatness_bound_from_terms(double emp, double flat, double kl, std::size_t m, double delta, double c,
                                      double h);

/// Flatness bound for posterior q on sample s. Requires h in (0, 1) and c > 0.
/// The alternate route computes the flatness term through the quadratic
/// empirical risk; it matches the definitional route only for zero-one loss.
BoundReport flatness_bound(const ProbMeasure& q, const LossTable& table, const Sample& s, double kl, double delta,
                           double c, double h, FlatnessRoute route = FlatnessRoute::definitional);

/// Evaluates any family from scalar terms, with the component breakdown.
BoundReport evaluate_bound_terms(BoundFamily family, const BoundParams& params, const BoundTerms& terms);

/// Evaluates any family for posterior q against prior p on sample s.
BoundReport evaluate_bound(BoundFamily family, const BoundParams& params, const ProbMeasure& q,
                           const ProbMeasure& p, const LossTable& table, const Sample& s);

}  // namespace pacbayes
