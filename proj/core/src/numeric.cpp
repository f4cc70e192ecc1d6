#include "pacbayes/numeric.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace pacbayes {

double log_cosh(double x) noexcept {
  const double ax = std::abs(x);
  if (ax > 20.0) {
    return ax + std::log1p(std::exp(-2.0 * ax)) - std::numbers::ln2;
  }
  // cosh(x) - 1 = 2 sinh(x/2)^2 keeps full relative precision for small x.
  const double s = std::sinh(0.5 * ax);
  return std::log1p(2.0 * s * s);
}

double log_cosh_ratio(double x) noexcept {
  if (x < 1e-4) {
    return x / 2.0 - x * x * x / 12.0;
  }
  return log_cosh(x) / x;
}

double log_weighted_sum_exp(std::span<const double> weights, std::span<const double> exponents) noexcept {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) top = std::max(top, exponents[i]);
  }
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) acc += weights[i] * std::exp(exponents[i] - top);
  }
  return top + std::log(acc);
}

}  // namespace pacbayes
