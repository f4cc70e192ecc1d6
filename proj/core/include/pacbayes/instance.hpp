#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pacbayes/gibbs.hpp"
#include "pacbayes/model.hpp"

namespace pacbayes {

/// A problem instance: data space, loss class, and optionally a prior and a posterior.
///
/// Text format (UTF-8; `#` starts a comment; numbers separated by blanks or commas):
///
///     [space]        point probabilities, one list
///     [losses]       one row per hypothesis
///     [binary]       true | false; must agree with the table if present
///     [prior]        hypothesis weights (optional)
///     [posterior]    hypothesis weights (optional)
struct Instance {
  DataDistribution space;
  LossTable losses;
  std::optional<ProbMeasure> prior;
  std::optional<ProbMeasure> posterior;

  /// Prior from the file, or uniform over the hypotheses.
  [[nodiscard]] ProbMeasure prior_or_uniform() const;
};

/// Raised for malformed instance or configuration text; carries the line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

Instance parse_instance(std::string_view text);
Instance load_instance(const std::filesystem::path& path);
std::string format_instance(const Instance& instance);
void save_instance(const Instance& instance, const std::filesystem::path& path);

struct InstanceGenOptions {
  std::size_t hypotheses = 10;
  std::size_t points = 8;
  /// 2 gives zero-one loss; k > 2 draws losses from {0, 1/(k-1), ..., 1}.
  std::size_t loss_levels = 2;
  /// Per-hypothesis error rates are drawn uniformly from [0, max_error].
  double max_error = 0.5;
};

/// Random instance with a uniform prior and a point-mass posterior on the
/// hypothesis of smallest true risk. Deterministic in `seed`.
Instance generate_instance(const InstanceGenOptions& options, std::uint64_t seed);

}  // namespace pacbayes
