#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "oracle_values.hpp"
#include "pacbayes/bounds.hpp"
#include "pacbayes/compare.hpp"
#include "pacbayes/numeric.hpp"
#include "random_instances.hpp"

using namespace pacbayes;
using namespace testing_support;
using Catch::Approx;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST_CASE("McAllester bound", "[bounds]") {
  CHECK(rel(mcallester_bound(0.1, 2.0, 100, 0.05), oracle::mcallester_01_2_100_005) < 1e-14);
  CHECK(mcallester_bound(0.2, 0.0, 2, 0.1) > mcallester_bound(0.2, 0.0, 2, 0.5));
  CHECK(mcallester_bound(0.2, 0.0, 2, 0.5) > mcallester_bound(0.2, 0.0, 2, 0.9));
  CHECK(mcallester_bound(0.2, 0.0, 2, 0.9) > mcallester_bound(0.2, 0.0, 2, 0.999999));
  CHECK(mcallester_bound(0.0, 0.0, 100000000, 0.05) < 1e-3);
  CHECK_THROWS_AS(mcallester_bound(0.1, 1.0, 1, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(mcallester_bound(0.1, 1.0, 10, 1.0), std::invalid_argument);
  CHECK(mcallester_bound(0.1, kInf, 10, 0.05) == kInf);
}

TEST_CASE("Catoni bound and its prefactor", "[bounds]") {
  CHECK(rel(catoni_bound(0.1, 2.0, 100, 0.05, 1.0), oracle::catoni_01_2_100_005_C1) < 1e-14);
  CHECK(rel(catoni_prefactor(1e-6), oracle::catoni_prefactor_1e6) < 1e-10);
  CHECK(rel(catoni_prefactor(0.1), oracle::catoni_prefactor_01) < 1e-10);
  CHECK(rel(catoni_prefactor(1.0), oracle::catoni_prefactor_1) < 1e-10);
  CHECK(rel(catoni_prefactor(5.0), oracle::catoni_prefactor_5) < 1e-10);
  CHECK(std::abs(catoni_prefactor(1e-6) - 1.0) < 1e-5);
  CHECK(catoni_prefactor(1.0) == Approx(1.0 / (1.0 - std::exp(-1.0))).epsilon(1e-12));
  CHECK(catoni_bound(0.1, kInf, 100, 0.05, 1.0) == kInf);
  CHECK_THROWS_AS(catoni_bound(0.1, 1.0, 100, 0.05, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(catoni_prefactor(-1.0), std::invalid_argument);
  for (double C : {0.01, 0.5, 1.0, 3.0}) {
    CHECK(catoni_bound(0.3, 0.0, 10, 0.5, C) >= 0.3 * catoni_prefactor(C));
  }
}

TEST_CASE("KST bound", "[bounds]") {
  CHECK(rel(kst_bound(0.0, 0.0, 100, 0.05), oracle::kst_0_0_100_005) < 1e-14);
  CHECK(kst_bound(0.2, 1.0, 50, 0.1) == kst_bound(0.2, 2.0, 50, 0.1));
  const double base = kst_bound(0.0, 3.0, 100, 0.05);
  CHECK(kst_bound(0.0, 3.0, 400, 0.05) == Approx(base / 2).epsilon(1e-15));
  CHECK(kst_bound(0.1, 0.0, 37, 0.3) >= 0.1 + 4.5 * std::sqrt(2.0 / 37));
  CHECK(kst_bound(0.1, kInf, 37, 0.3) == kInf);
}

TEST_CASE("matched Catoni constants", "[bounds]") {
  const auto d = derive_matched_catoni_constants(1.0, 0.5, 0.05);
  CHECK(d.c_prime == Approx(1.0 / 3).epsilon(1e-15));
  CHECK(d.c_doubleprime == 0.25);
  CHECK(d.provenance.target_ratio == Approx(1.0 / 7).epsilon(1e-15));
  CHECK(rel(d.lambda_over_m, oracle::matched_lambda_over_m) < 1e-10);
  CHECK(rel(d.C_big, oracle::matched_C_prime) < 1e-10);
  CHECK(rel(d.C1, oracle::matched_C1) < 1e-10);
  CHECK(d.C2 == d.C_big);
  CHECK(rel(d.C3, oracle::matched_C3) < 1e-10);
  CHECK(rel(d.provenance.delta_cap, oracle::matched_delta_cap) < 1e-12);
  CHECK_FALSE(d.provenance.cap_active);
  CHECK(d.provenance.delta_for_cap == 0.05);
  CHECK(d.provenance.shift_k == Approx((1.0 / 3) / (2 + 1.0 / 3)).epsilon(1e-15));
  CHECK(d.provenance.t_prime_scale == Approx(1.0 / 3).epsilon(1e-15));
  CHECK(log_cosh_ratio(d.lambda_over_m) <= d.provenance.target_ratio + 1e-12);
  CHECK(d.provenance.ratio_at_choice == log_cosh_ratio(d.lambda_over_m));
}

TEST_CASE("matched Catoni rate grows with c and degenerates as c2 approaches c", "[bounds]") {
  const double l05 = derive_matched_catoni_constants(0.5, 0.25, 0.05).lambda_over_m;
  const double l1 = derive_matched_catoni_constants(1.0, 0.5, 0.05).lambda_over_m;
  const double l2 = derive_matched_catoni_constants(2.0, 1.0, 0.05).lambda_over_m;
  CHECK(rel(l05, oracle::matched_lambda_c05) < 1e-10);
  CHECK(rel(l1, oracle::matched_lambda_c1) < 1e-10);
  CHECK(rel(l2, oracle::matched_lambda_c2) < 1e-10);
  CHECK(l05 < l1);
  CHECK(l1 < l2);
  CHECK(derive_matched_catoni_constants(1.0, 0.999, 0.05).C1 > derive_matched_catoni_constants(1.0, 0.5, 0.05).C1);
  CHECK_THROWS_AS(derive_matched_catoni_constants(1.0, 1.0, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(derive_matched_catoni_constants(1.0, 0.0, 0.05), std::invalid_argument);
}

TEST_CASE("delta cap takes over for large delta", "[bounds]") {
  // The cap shrinks with log(4/delta); with c2 small it binds before the root.
  const auto d = derive_matched_catoni_constants(1.0, 0.01, 0.9);
  if (d.provenance.cap_active) {
    CHECK(d.lambda_over_m == d.provenance.delta_cap);
    CHECK(d.lambda_over_m < d.provenance.bisection_root);
  } else {
    CHECK(d.lambda_over_m == d.provenance.bisection_root);
    CHECK(d.provenance.bisection_root <= d.provenance.delta_cap);
  }
}

TEST_CASE("matched Catoni bound", "[bounds]") {
  CHECK(rel(matched_catoni_bound(0.0, 0.0, 10000, 0.05, 1.0, 0.5), oracle::matched_bound_m1e4_emp0) < 1e-10);
  const auto d = derive_matched_catoni_constants(1.0, 0.5, 0.05);
  CHECK(matched_catoni_bound(0.02, 0.0, 10000, 0.05, 1.0, 0.5) ==
        Approx(2 * 0.02 + (d.C2 * std::log(20.0) + d.C3) / 1e4).epsilon(1e-14));
  CHECK(matched_catoni_bound(0.0, 0.0, 2000, 0.05, 1.0, 0.5) ==
        Approx(matched_catoni_bound(0.0, 0.0, 1000, 0.05, 1.0, 0.5) / 2).epsilon(1e-15));
  CHECK(matched_catoni_bound(0.0, kInf, 10, 0.05, 1.0, 0.5) == kInf);
}

TEST_CASE("matched Catoni dominates the aligned Catoni bound", "[bounds]") {
  const double c = 1.0;
  const double C = aligned_catoni_C(c);
  const auto d = derive_matched_catoni_constants(c, 0.5, 0.05);
  for (double emp : {0.0, 0.05, 0.3}) {
    for (double kl : {0.0, 0.5, 3.0, 20.0}) {
      for (std::size_t m : {10u, 1000u, 100000u}) {
        for (double delta : {0.01, 0.05}) {
          const double matched = matched_catoni_bound(emp, kl, m, delta, c, 0.5);
          const double catoni = catoni_bound(emp, kl, m, delta, C);
          CHECK(matched >= catoni);
          const double matched_complexity = matched - (1 + c) * emp;
          const double catoni_complexity = catoni - catoni_prefactor(C) * emp;
          CHECK(matched_complexity / catoni_complexity <= d.C1);
        }
      }
    }
  }
}

TEST_CASE("flatness bound", "[bounds]") {
  CHECK(flatness_rate_constant(1.0, 0.5) == Approx(oracle::flatness_C_c1_h05).epsilon(1e-15));
  const auto r = flatness_bound_from_terms(0.0, 0.0, 1.0, 1000, 0.05, 1.0, 0.5);
  CHECK(rel(r.complexity_term, oracle::flatness_rate_m1000_kl1_005) < 1e-13);
  CHECK(r.value == r.complexity_term);
  CHECK(*r.constant("C") == Approx(0.025).epsilon(1e-15));

  const LossTable table = LossTable::from_rows({{0, 0, 0}, {1, 0, 1}});
  const Sample s({0, 1, 2, 0}, 0);
  const auto flat = flatness_bound(ProbMeasure::point_mass(2, 0), table, s, 0.3, 0.05, 1.0, 0.5);
  CHECK(flat.empirical_term == 0.0);
  CHECK(flat.flatness_term == 0.0);
  CHECK(flat.value == flat.complexity_term);

  CHECK_THROWS_AS(flatness_bound(ProbMeasure::uniform(2), table, s, 0.0, 0.05, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(flatness_bound(ProbMeasure::uniform(2), table, s, 0.0, 0.05, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(flatness_bound(ProbMeasure::uniform(2), table, s, 0.0, 0.05, 0.0, 0.5), std::invalid_argument);
  CHECK(flatness_bound(ProbMeasure::uniform(2), table, s, kInf, 0.05, 1.0, 0.5).value == kInf);
}

TEST_CASE("flatness term never exceeds the excess empirical risk term", "[bounds][property]") {
  CounterRng rng(61);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = pick(rng, 1, 10);
    const std::size_t k = pick(rng, 1, 8);
    const auto table = random_table(rng, n, k);
    const auto q = random_measure(rng, n);
    const auto s = random_sample(rng, k, pick(rng, 1, 40));
    const double c = 0.5 + rng.uniform01();
    const double h = 0.1 + 0.8 * rng.uniform01();
    const auto def = flatness_bound(q, table, s, 0.7, 0.05, c, h, FlatnessRoute::definitional);
    const auto alt = flatness_bound(q, table, s, 0.7, 0.05, c, h, FlatnessRoute::alternate);
    CHECK(std::abs(def.value - alt.value) <= 1e-9);
    CHECK(def.flatness_term <= c * def.empirical_term + 1e-12);
    const double expected = c * (gibbs_empirical_risk(q, table, s) - (1 - h * h) * quadratic_empirical_risk(q, table, s));
    CHECK(std::abs(def.flatness_term - expected) <= 1e-9);
  }
}

TEST_CASE("every family is monotone in kl, m and delta", "[bounds][property]") {
  BoundParams params;
  params.catoni_C = 0.8;
  params.c = 1.0;
  params.h = 0.6;
  for (BoundFamily family : kAllBoundFamilies) {
    for (double emp : {0.0, 0.1}) {
      const double flat = 0.05;
      double prev_kl = -1.0;
      for (double kl : {0.0, 0.5, 1.0, 2.0, 5.0, 40.0}) {
        params.delta = 0.05;
        const double v = evaluate_bound_terms(family, params, {emp, kl, 200, flat}).value;
        CHECK(v >= prev_kl);
        prev_kl = v;
      }
      double prev_m = kInf;
      for (std::size_t m : {2u, 5u, 20u, 100u, 1000u, 100000u}) {
        const double v = evaluate_bound_terms(family, params, {emp, 1.0, m, flat}).value;
        CHECK(v <= prev_m);
        prev_m = v;
      }
      double prev_delta = kInf;
      for (double delta : {0.001, 0.01, 0.05, 0.2, 0.5, 0.9}) {
        params.delta = delta;
        const double v = evaluate_bound_terms(family, params, {emp, 1.0, 200, flat}).value;
        CHECK(v <= prev_delta);
        prev_delta = v;
      }
    }
  }
}

TEST_CASE("reports reconstruct from their components", "[bounds][property]") {
  CounterRng rng(67);
  BoundParams params;
  for (int rep = 0; rep < 100; ++rep) {
    params.delta = 0.01 + 0.9 * rng.uniform01();
    params.catoni_C = 0.1 + 3 * rng.uniform01();
    params.c = 0.2 + 2 * rng.uniform01();
    params.h = 0.1 + 0.85 * rng.uniform01();
    const BoundTerms terms{rng.uniform01(), 5 * rng.uniform01(), pick(rng, 2, 5000), 0.3 * rng.uniform01()};
    for (BoundFamily family : kAllBoundFamilies) {
      const auto r = evaluate_bound_terms(family, params, terms);
      CHECK(r.family == family);
      CHECK(std::abs(r.value - (r.empirical_term + r.complexity_term + r.flatness_term)) <= 1e-12);
    }
  }
}

TEST_CASE("report constants record the derived values", "[bounds]") {
  BoundParams params;
  const auto matched = evaluate_bound_terms(BoundFamily::matched_catoni, params, {0.1, 1.0, 100});
  CHECK(*matched.constant("c2") == 0.5);
  CHECK(rel(*matched.constant("lambda_over_m"), oracle::matched_lambda_over_m) < 1e-10);
  CHECK(rel(*matched.constant("C1"), oracle::matched_C1) < 1e-10);
  const auto flat = evaluate_bound_terms(BoundFamily::flatness, params, {0.1, 1.0, 100, 0.01});
  CHECK(*flat.constant("c2") == Approx(0.25 / (1 + 4.0)).epsilon(1e-15));
  CHECK_FALSE(flat.constant("C1").has_value());
}

TEST_CASE("parameter validation and family names", "[bounds]") {
  BoundParams params;
  params.c2 = 1.5;
  CHECK_THROWS_AS(params.validate(BoundFamily::matched_catoni), std::invalid_argument);
  params.c2.reset();
  params.h = 1.0;
  CHECK_THROWS_AS(params.validate(BoundFamily::flatness), std::invalid_argument);
  CHECK_NOTHROW(params.validate(BoundFamily::catoni));
  params.delta = 0.0;
  CHECK_THROWS_AS(params.validate(BoundFamily::catoni), std::invalid_argument);
  for (BoundFamily f : kAllBoundFamilies) CHECK(parse_bound_family(to_string(f)) == f);
  CHECK(parse_bound_family("matched-catoni") == BoundFamily::matched_catoni);
  CHECK_FALSE(parse_bound_family("seeger").has_value());
}

TEST_CASE("bounds from measures use kl and the Gibbs empirical risk", "[bounds]") {
  const LossTable table = LossTable::from_rows({{1, 0}, {0, 1}, {1, 1}});
  const Sample s({0, 0, 1}, 0);
  const auto q = ProbMeasure({0.6, 0.4, 0.0});
  const auto p = ProbMeasure::uniform(3);
  BoundParams params;
  const auto r = evaluate_bound(BoundFamily::catoni, params, q, p, table, s);
  CHECK(r.value == Approx(catoni_bound(gibbs_empirical_risk(q, table, s), kl_divergence(q, p), 3, 0.05, 1.0)).epsilon(1e-15));
  const auto inf = evaluate_bound(BoundFamily::kst, params, p, ProbMeasure({0.5, 0.5, 0.0}), table, s);
  CHECK(inf.value == kInf);
}
