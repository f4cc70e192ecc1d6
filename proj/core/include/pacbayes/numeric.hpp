#pragma once

#include <cmath>
#include <span>

namespace pacbayes {

/// log(cosh(x)) without overflow for large |x| and without cancellation near 0.
double log_cosh(double x) noexcept;

/// log(cosh(x)) / x for x > 0, increasing from 0 (x -> 0+) to 1 (x -> inf).
/// Uses the series x/2 - x^3/12 below 1e-4.
double log_cosh_ratio(double x) noexcept;

/// log(sum_i w_i * exp(a_i)) over entries with w_i > 0; -inf if there are none.
double log_weighted_sum_exp(std::span<const double> weights, std::span<const double> exponents) noexcept;

/// Largest x in [lo, hi] with pred(x) true, assuming pred is true on [lo, x*]
/// and false after. Stops when the bracket is narrower than tol.
template <class Pred>
double bisect_last_true(Pred pred, double lo, double hi, double tol) {
  if (pred(hi)) return hi;
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

/// Minimizes a unimodal function on [lo, hi] by golden-section search.
/// Returns the abscissa of the best point evaluated.
template <class Fn>
double golden_section_minimize(Fn fn, double lo, double hi, double rel_tol = 1e-12, int max_iter = 300) {
  constexpr double kInvPhi = 0.6180339887498948482;
  double a = lo;
  double b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = fn(x1);
  double f2 = fn(x2);
  for (int it = 0; it < max_iter && (b - a) > rel_tol * (std::abs(a) + std::abs(b)); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = fn(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

}  // namespace pacbayes
