#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pacbayes/gibbs.hpp"
#include "pacbayes/model.hpp"
#include "pacbayes/posterior.hpp"

namespace pacbayes {

/// Sample size beyond which the flatness bound is tighter than Catoni's bound
/// when both inflate the empirical risk by the same factor:
///   (1/T_m) ((C_r - C_c)(kl + log(1/delta)) + C_r).
double crossover_threshold(double T_m, double C_r, double C_c, double kl, double delta);

/// Catoni's C with C / (1 - e^{-C}) = 1 + c, by bisection. Requires c > 0.
double aligned_catoni_C(double c);

/// Rate constants of the two bounds written as
///   (1 + c) Rhat + (C_c / m)(kl + log(1/delta))                       (Catoni)
///   (1 + c) Rhat - T_m + (C_r / m)(kl + log(1/delta) + 1)            (flatness)
/// C_c = 1/(1 - e^{-C}) for the aligned C. C_r = 12/C for the flatness rate
/// constant C, the smallest value for which the second form dominates
/// 4/(C m) (3 kl + log(1/delta) + 5) whenever delta <= 1/e.
struct SchematicConstants {
  double C_r;
  double C_c;
};
SchematicConstants schematic_constants(double c, double h);

struct SweepConfig {
  double c = 1.0;
  double h = 0.5;
  double delta = 0.05;
  std::vector<std::size_t> m_grid;
  std::size_t trials = 20;
  std::uint64_t seed = 0;
};

struct SweepRow {
  std::size_t m;
  double catoni_mean;
  double flatness_mean;
  /// Mean of c (1 - h^2)/m sum_i G_Q(z_i)^2.
  double T_m_mean;
  double kl_mean;
  /// flatness_mean < catoni_mean
  bool crossover_flag;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  /// First grid m at which the flatness bound is tighter; +inf if none.
  double crossover_m;
  double catoni_C;
  /// Means over every trial of every row.
  double T_m_mean;
  double kl_mean;
};

/// Evaluates the flatness bound and the aligned Catoni bound on the same
/// per-trial samples and posteriors for every m in the grid. Row r uses
/// stream (seed, r); trial j of that row uses the derived stream (row, j).
/// A bound_minimizer rule optimizes the flatness bound.
SweepTable bound_sweep(const DataDistribution& dist, const LossTable& table, const ProbMeasure& prior,
                       const PosteriorRule& rule, const SweepConfig& config);

}  // namespace pacbayes
