#include "pacbayes/bounds.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pacbayes/numeric.hpp"

namespace pacbayes {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

void check_kl(double kl) {
  if (!(kl >= 0.0)) throw std::invalid_argument("KL divergence must be nonnegative");
}

void check_emp(double emp) {
  if (!(emp >= 0.0 && emp <= 1.0)) throw std::invalid_argument("empirical risk must lie in [0, 1]");
}

void check_m(std::size_t m) {
  if (m == 0) throw std::invalid_argument("sample size m must be at least 1");
}

double log_inv_delta(double delta) { return -std::log(delta); }

}  // namespace

std::string_view to_string(BoundFamily family) noexcept {
  switch (family) {
    case BoundFamily::mcallester: return "mcallester";
    case BoundFamily::catoni: return "catoni";
    case BoundFamily::kst: return "kst";
    case BoundFamily::matched_catoni: return "matched_catoni";
    case BoundFamily::flatness: return "flatness";
  }
  return "unknown";
}

std::optional<BoundFamily> parse_bound_family(std::string_view name) noexcept {
  for (auto f : kAllBoundFamilies) {
    if (name == to_string(f)) return f;
  }
  if (name == "matched-catoni") return BoundFamily::matched_catoni;
  return std::nullopt;
}

void BoundParams::validate(BoundFamily family) const {
  check_delta(delta);
  switch (family) {
    case BoundFamily::mcallester:
    case BoundFamily::kst:
      break;
    case BoundFamily::catoni:
      if (!(catoni_C > 0.0)) throw std::invalid_argument("Catoni's C must be positive");
      break;
    case BoundFamily::matched_catoni: {
      if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
      const double k2 = c2_or_default(family);
      if (!(k2 > 0.0 && k2 < c)) throw std::invalid_argument("c2 must satisfy 0 < c2 < c");
      break;
    }
    case BoundFamily::flatness: {
      if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
      if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("flatness bound needs h in (0, 1)");
      const double k2 = c2_or_default(family);
      if (!(k2 > 0.0 && k2 < h * h * c)) throw std::invalid_argument("c2 must satisfy 0 < c2 < h^2 c");
      break;
    }
  }
}

double BoundParams::c2_or_default(BoundFamily family) const {
  if (c2) return *c2;
  if (family == BoundFamily::flatness) return h * h * c / (1.0 + 16.0 * h * h * c);
  return c / 2.0;
}

std::optional<double> BoundReport::constant(std::string_view name) const {
  for (const auto& nv : constants) {
    if (nv.name == name) return nv.value;
  }
  return std::nullopt;
}

double mcallester_bound(double emp, double kl, std::size_t m, double delta) {
  check_emp(emp);
  check_kl(kl);
  check_delta(delta);
  if (m < 2) throw std::invalid_argument("McAllester's bound needs m >= 2");
  const double md = static_cast<double>(m);
  return emp + std::sqrt((kl + std::log(md / delta)) / (2.0 * (md - 1.0)));
}

double catoni_prefactor(double C) {
  if (!(C > 0.0)) throw std::invalid_argument("Catoni's C must be positive");
  return C / -std::expm1(-C);
}

double catoni_bound(double emp, double kl, std::size_t m, double delta, double C) {
  BoundParams params;
  params.delta = delta;
  params.catoni_C = C;
  return evaluate_bound_terms(BoundFamily::catoni, params, {emp, kl, m}).value;
}

double kst_bound(double emp, double kl, std::size_t m, double delta) {
  BoundParams params;
  params.delta = delta;
  return evaluate_bound_terms(BoundFamily::kst, params, {emp, kl, m}).value;
}

DerivedConstants derive_matched_catoni_constants(double c, double c2, double delta) {
  if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
  if (!(c2 > 0.0 && c2 < c)) throw std::invalid_argument("c2 must satisfy 0 < c2 < c");
  check_delta(delta);

  const double c_prime = (c - c2) / (1.0 + c2);
  const double target = c_prime / (c_prime + 2.0);
  // log cosh(x)/x is increasing, so the admissible set is an interval (0, root].
  const double root = bisect_last_true([&](double x) { return log_cosh_ratio(x) <= target; }, 1e-12, 10.0, 1e-12);
  const double cap =
      2.0 * (1.0 + c2) * (2.0 + c_prime) * std::log(4.0 / delta) / ((1.0 + c2) * (1.0 + c2) / c2);
  const double lambda_over_m = std::min(root, cap);
  const double C_big = 2.0 * (1.0 + c2) * (2.0 + c_prime) / lambda_over_m;

  DerivedConstants d{};
  d.lambda_over_m = lambda_over_m;
  d.c_prime = c_prime;
  d.c_doubleprime = (c - c2) / 2.0;
  d.C_big = C_big;
  d.C1 = 3.0 * C_big;
  d.C2 = C_big;
  d.C3 = C_big * (3.0 + std::log(8.0));
  d.provenance = MatchedCatoniProvenance{
      .target_ratio = target,
      .bisection_root = root,
      .delta_cap = cap,
      .cap_active = cap < root,
      .ratio_at_choice = log_cosh_ratio(lambda_over_m),
      .delta_for_cap = delta,
      .t_prime_scale = 1.0 / (2.0 * (1.0 + c2)),
      .shift_k = c_prime / (2.0 + c_prime),
  };
  return d;
}

double matched_catoni_bound(double emp, double kl, std::size_t m, double delta, double c, double c2) {
  BoundParams params;
  params.delta = delta;
  params.c = c;
  params.c2 = c2;
  return evaluate_bound_terms(BoundFamily::matched_catoni, params, {emp, kl, m}).value;
}

double flatness_rate_constant(double c, double h) {
  if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
  if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("h must lie in (0, 1]");
  const double h2 = h * h;
  return 2.0 * h2 * h2 * c / (1.0 + 16.0 * h2 * c);
}

BoundReport flatness_bound_from_terms(double emp, double flat, double kl, std::size_t m, double delta, double c,
                                      double h) {
  BoundParams params;
  params.delta = delta;
  params.c = c;
  params.h = h;
  return evaluate_bound_terms(BoundFamily::flatness, params, {emp, kl, m, flat});
}

BoundReport flatness_bound(const ProbMeasure& q, const LossTable& table, const Sample& s, double kl, double delta,
                           double c, double h, FlatnessRoute route) {
  if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("flatness bound needs h in (0, 1)");
  const double emp = gibbs_empirical_risk(q, table, s);
  const double flat =
      route == FlatnessRoute::definitional ? flatness(q, table, s, h).value : flatness_alternate(q, table, s, h);
  return flatness_bound_from_terms(emp, flat, kl, s.size(), delta, c, h);
}

BoundReport evaluate_bound_terms(BoundFamily family, const BoundParams& params, const BoundTerms& terms) {
  params.validate(family);
  check_emp(terms.empirical_risk);
  check_kl(terms.kl);
  check_m(terms.m);

  const double emp = terms.empirical_risk;
  const double kl = terms.kl;
  const double md = static_cast<double>(terms.m);
  const double log_delta = log_inv_delta(params.delta);

  BoundReport r{family, 0.0, 0.0, 0.0, 0.0, {}};
  switch (family) {
    case BoundFamily::mcallester: {
      if (terms.m < 2) throw std::invalid_argument("McAllester's bound needs m >= 2");
      r.empirical_term = emp;
      r.complexity_term = std::sqrt((kl + std::log(md / params.delta)) / (2.0 * (md - 1.0)));
      break;
    }
    case BoundFamily::catoni: {
      const double C = params.catoni_C;
      const double denom = -std::expm1(-C);
      r.empirical_term = C * emp / denom;
      r.complexity_term = (kl + log_delta) / (md * denom);
      r.constants = {{"C", C}, {"prefactor", C / denom}};
      break;
    }
    case BoundFamily::kst: {
      r.empirical_term = emp;
      r.complexity_term = 4.5 * std::sqrt(std::max(kl, 2.0) / md) + std::sqrt(log_delta / md);
      break;
    }
    case BoundFamily::matched_catoni: {
      const double c2 = params.c2_or_default(family);
      const auto d = derive_matched_catoni_constants(params.c, c2, params.delta);
      r.empirical_term = (1.0 + params.c) * emp;
      r.complexity_term = (d.C1 * kl + d.C2 * log_delta + d.C3) / md;
      r.constants = {{"c2", c2},         {"lambda_over_m", d.lambda_over_m}, {"C_prime", d.C_big},
                     {"C1", d.C1},       {"C2", d.C2},                       {"C3", d.C3},
                     {"delta_cap", d.provenance.delta_cap}};
      break;
    }
    case BoundFamily::flatness: {
      if (!(terms.flatness >= 0.0)) throw std::invalid_argument("flatness term must be nonnegative");
      const double C = flatness_rate_constant(params.c, params.h);
      r.empirical_term = emp;
      r.flatness_term = params.c * terms.flatness;
      r.complexity_term = 4.0 / (C * md) * (3.0 * kl + log_delta + 5.0);
      r.constants = {{"C", C}, {"c2", params.c2_or_default(family)}};
      break;
    }
  }
  r.value = r.empirical_term + r.complexity_term + r.flatness_term;
  return r;
}

BoundReport evaluate_bound(BoundFamily family, const BoundParams& params, const ProbMeasure& q,
                           const ProbMeasure& p, const LossTable& table, const Sample& s) {
  const double kl = kl_divergence(q, p);
  const double emp = gibbs_empirical_risk(q, table, s);
  BoundTerms terms{emp, kl, s.size()};
  if (family == BoundFamily::flatness) {
    params.validate(family);
    terms.flatness = flatness(q, table, s, params.h).value;
  }
  return evaluate_bound_terms(family, params, terms);
}

}  // namespace pacbayes
