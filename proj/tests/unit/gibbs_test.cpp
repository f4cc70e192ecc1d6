#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oracle_values.hpp"
#include "pacbayes/gibbs.hpp"
#include "random_instances.hpp"

using namespace pacbayes;
using namespace testing_support;
using Catch::Approx;

TEST_CASE("measures validate their weights", "[gibbs]") {
  CHECK_THROWS_AS(ProbMeasure({0.5, 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(ProbMeasure({1.2, -0.2}), std::invalid_argument);
  CHECK(ProbMeasure::normalized({1.0, 3.0})[1] == 0.75);
  CHECK(ProbMeasure::uniform(4)[2] == 0.25);
  CHECK(ProbMeasure::point_mass(3, 1)[1] == 1.0);
}

TEST_CASE("kl divergence closed forms", "[gibbs]") {
  const auto p = ProbMeasure({0.2, 0.3, 0.5});
  CHECK(kl_divergence(p, p) == 0.0);
  CHECK(kl_divergence(ProbMeasure::point_mass(5, 2), ProbMeasure::uniform(5)) == Approx(std::log(5.0)).epsilon(1e-15));
  CHECK(kl_divergence(ProbMeasure({0.75, 0.25}), ProbMeasure({0.5, 0.5})) ==
        Approx(oracle::kl_075_025_vs_uniform).epsilon(1e-14));
}

TEST_CASE("kl divergence marks support violations as infinite", "[gibbs]") {
  const double kl = kl_divergence(ProbMeasure({0.5, 0.5}), ProbMeasure({1.0, 0.0}));
  CHECK(kl == kInfiniteKl);
  CHECK(kl_divergence(ProbMeasure({1.0, 0.0}), ProbMeasure({0.5, 0.5})) == Approx(std::log(2.0)));
  CHECK_THROWS_AS(kl_divergence(ProbMeasure::uniform(2), ProbMeasure::uniform(3)), std::invalid_argument);
}

TEST_CASE("kl divergence is nonnegative and vanishes only at equality", "[gibbs][property]") {
  CounterRng rng(21);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = pick(rng, 1, 12);
    const auto q = random_measure(rng, n);
    const auto p = random_measure(rng, n);
    const double kl = kl_divergence(q, p);
    CHECK(kl >= 0.0);
    bool equal = true;
    for (std::size_t i = 0; i < n; ++i) equal = equal && std::abs(q[i] - p[i]) <= 1e-12;
    if (!equal) CHECK(kl > 0.0);
    CHECK(kl_divergence(q, q) == 0.0);
  }
}

TEST_CASE("gibbs loss is a column average", "[gibbs]") {
  const LossTable table = LossTable::from_rows({{1, 0}, {0, 1}});
  CHECK(gibbs_loss(ProbMeasure::point_mass(2, 1), table, 1) == 1.0);
  CHECK(gibbs_loss(ProbMeasure::uniform(2), table, 0) == 0.5);
  CHECK(gibbs_loss(ProbMeasure({0.2, 0.8}), table, 0) == Approx(0.2).epsilon(1e-15));
  CHECK_THROWS_AS(gibbs_loss(ProbMeasure::uniform(2), table, 2), std::invalid_argument);
  CHECK_THROWS_AS(gibbs_loss(ProbMeasure::uniform(3), table, 0), std::invalid_argument);
}

TEST_CASE("gibbs risks of point masses and symmetric mixtures", "[gibbs]") {
  const LossTable table = LossTable::from_rows({{1, 0}, {0, 1}});
  const DataDistribution dist({0.3, 0.7});
  CHECK(gibbs_risk(ProbMeasure::point_mass(2, 0), table, dist) == true_risk(table, 0, dist));
  CHECK(gibbs_risk(ProbMeasure::uniform(2), table, DataDistribution({0.5, 0.5})) == 0.5);
  const Sample s({0, 1, 1}, 0);
  CHECK(gibbs_empirical_risk(ProbMeasure::point_mass(2, 1), table, s) == empirical_risk(table, 1, s));
  CHECK(gibbs_empirical_risk(ProbMeasure::uniform(2), table, Sample({0, 1}, 0)) == 0.5);
}

TEST_CASE("gibbs risks are linear in the posterior", "[gibbs][property]") {
  CounterRng rng(31);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = pick(rng, 2, 10);
    const std::size_t k = pick(rng, 2, 8);
    const auto table = random_table(rng, n, k, 4);
    const auto dist = random_distribution(rng, k);
    const auto s = random_sample(rng, k, pick(rng, 1, 30));
    const auto q1 = random_measure(rng, n);
    const auto q2 = random_measure(rng, n);
    std::vector<double> mix(n);
    for (std::size_t i = 0; i < n; ++i) mix[i] = 0.3 * q1[i] + 0.7 * q2[i];
    const auto q = ProbMeasure::normalized(mix);
    CHECK(gibbs_risk(q, table, dist) ==
          Approx(0.3 * gibbs_risk(q1, table, dist) + 0.7 * gibbs_risk(q2, table, dist)).margin(1e-14));
    CHECK(gibbs_empirical_risk(q, table, s) ==
          Approx(0.3 * gibbs_empirical_risk(q1, table, s) + 0.7 * gibbs_empirical_risk(q2, table, s)).margin(1e-14));
  }
}

TEST_CASE("flatness of a completely flat posterior", "[gibbs]") {
  const LossTable table = LossTable::from_rows({{1, 0, 1}, {0, 0, 0}});
  const Sample s({0, 1, 2, 2, 1}, 0);
  for (double h : {0.1, 0.5, 1.0}) {
    const auto fv = flatness(ProbMeasure::point_mass(2, 0), table, s, h);
    CHECK(fv.h == h);
    CHECK(fv.value == Approx(h * h * empirical_risk(table, 0, s)).epsilon(1e-14));
    CHECK(flatness(ProbMeasure::point_mass(2, 1), table, s, h).value == 0.0);
  }
}

TEST_CASE("flatness alternate form on a two-point sample", "[gibbs]") {
  const LossTable table = LossTable::from_rows({{1, 0}, {0, 1}});
  const Sample s({0, 1}, 0);
  CHECK(flatness_alternate(ProbMeasure::uniform(2), table, s, 0.0) == Approx(0.25).epsilon(1e-15));
  CHECK(flatness_alternate(ProbMeasure::uniform(2), table, s, 1.0) == gibbs_empirical_risk(ProbMeasure::uniform(2), table, s));
  CHECK(flatness(ProbMeasure::uniform(2), table, s, 0.5).value ==
        Approx(flatness_alternate(ProbMeasure::uniform(2), table, s, 0.5)).margin(1e-15));
}

TEST_CASE("flatness rejects h outside its domain", "[gibbs]") {
  const LossTable table = LossTable::from_rows({{1, 0}});
  const Sample s({0}, 0);
  const auto q = ProbMeasure::uniform(1);
  CHECK_THROWS_AS(flatness(q, table, s, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(flatness(q, table, s, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(flatness_alternate(q, table, s, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(flatness_alternate(q, table, s, 1.1), std::invalid_argument);
}

TEST_CASE("flatness identity holds for zero-one loss", "[gibbs][property]") {
  CounterRng rng(41);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = pick(rng, 1, 20);
    const std::size_t k = pick(rng, 1, 10);
    const auto table = random_table(rng, n, k);
    const auto q = random_measure(rng, n);
    const auto s = random_sample(rng, k, pick(rng, 1, 50));
    const double h = 0.05 + 0.95 * rng.uniform01();
    const double def = flatness(q, table, s, h).value;
    CHECK(def >= 0.0);
    CHECK(std::abs(def - flatness_alternate(q, table, s, h)) <= 1e-9);
    CHECK(std::abs(def - (gibbs_empirical_risk(q, table, s) - (1 - h * h) * quadratic_empirical_risk(q, table, s))) <=
          1e-9);
  }
}

TEST_CASE("alternate form bounds flatness for graded losses", "[gibbs][property]") {
  CounterRng rng(43);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = pick(rng, 1, 15);
    const std::size_t k = pick(rng, 1, 8);
    const auto table = random_table(rng, n, k, 3);
    const auto q = random_measure(rng, n);
    const auto s = random_sample(rng, k, pick(rng, 1, 40));
    const double h = 0.05 + 0.95 * rng.uniform01();
    CHECK(flatness(q, table, s, h).value <= flatness_alternate(q, table, s, h) + 1e-12);
  }
}

TEST_CASE("flatness ignores sample order", "[gibbs][property]") {
  CounterRng rng(47);
  for (int rep = 0; rep < 50; ++rep) {
    const auto table = random_table(rng, 6, 5, 4);
    const auto q = random_measure(rng, 6);
    const auto s = random_sample(rng, 5, 17);
    std::vector<std::size_t> idx(s.indices().begin(), s.indices().end());
    std::reverse(idx.begin(), idx.end());
    std::rotate(idx.begin(), idx.begin() + 5, idx.end());
    CHECK(flatness(q, table, Sample(idx, 0), 0.7).value == Approx(flatness(q, table, s, 0.7).value).margin(1e-15));
  }
}
