#include <doctest.h>

#include <random>

#include "evslip/fuzzy.hpp"
#include "oracles.hpp"

using namespace evslip;

namespace {

// Aggregated membership at g computed straight from the rule table.
double mu_at(double g, const RuleStrengths& s, const FuzzyConfig& cfg) {
  double m = 0.0;
  for (int c = 0; c < 3; ++c)
    for (int e = 0; e < 3; ++e) {
      const GaussianMF& mf = cfg.force_mfs[static_cast<int>(cfg.rules[c][e])];
      m = std::max(m, std::min(s(c, e), mf(g)));
    }
  return m;
}

}  // namespace

TEST_SUITE("fuzzy_control") {

TEST_CASE("fuzzify on an equal partition") {
  const InputMFs mfs = equal_partition(0.0, 60.0);
  CHECK(fuzzify(0.0, mfs).isApprox(Degrees(1, 0, 0)));
  CHECK(fuzzify(30.0, mfs).isApprox(Degrees(0, 1, 0)));
  CHECK(fuzzify(60.0, mfs).isApprox(Degrees(0, 0, 1)));
  const Degrees d = fuzzify(9.0, mfs);
  CHECK(d(0) == doctest::Approx(0.7));
  CHECK(d(1) == doctest::Approx(0.3));
  CHECK(d(2) == 0.0);
  // Out of range inputs clamp onto the shoulders.
  CHECK(fuzzify(500.0, mfs).isApprox(Degrees(0, 0, 1)));
  CHECK(fuzzify(-3.0, mfs).isApprox(Degrees(1, 0, 0)));
  for (double x = 0; x <= 60; x += 0.37) CHECK(fuzzify(x, mfs).sum() == doctest::Approx(1.0));
}

TEST_CASE("rule strengths take the minimum") {
  const FuzzyConfig cfg;
  const Degrees e = fuzzify(9.0, cfg.edge_mfs);
  const Degrees c = fuzzify(30.0, cfg.corner_mfs);
  const RuleStrengths s = rule_strengths(e, c);
  CHECK(s(2, 0) == doctest::Approx(0.7));
  CHECK(s(2, 1) == doctest::Approx(0.3));
  CHECK(s.row(0).sum() == 0.0);
  CHECK(s.row(1).sum() == 0.0);
  CHECK(s(2, 2) == 0.0);
  CHECK(cfg.rules[2][0] == ForceLabel::M);
  CHECK(cfg.rules[2][1] == ForceLabel::L);
}

TEST_CASE("aggregate clips and takes the maximum") {
  const FuzzyConfig cfg;
  RuleStrengths s = RuleStrengths::Zero();
  s(2, 0) = 0.7;
  s(2, 1) = 0.3;
  const AggregatedOutput out = aggregate(s, cfg);
  REQUIRE(out.g.size() == 1001);
  CHECK(out.g(0) == 0.0);
  CHECK(out.g(1000) == 100.0);
  CHECK(out.mu.maxCoeff() == doctest::Approx(0.7));
  for (Eigen::Index i = 0; i < out.g.size(); i += 37) CHECK(out.mu(i) == doctest::Approx(mu_at(out.g(i), s, cfg)));
  CHECK_THROWS_AS(defuzzify_cog(aggregate(RuleStrengths::Zero(), cfg)), EmptyAggregate);
}

TEST_CASE("symmetric output sets defuzzify to their centre") {
  const FuzzyConfig cfg;
  RuleStrengths s = RuleStrengths::Zero();
  s(1, 1) = 1.0;  // M only
  CHECK(std::abs(defuzzify_cog(aggregate(s, cfg)) - 50.0) < 1e-6);
  s(0, 1) = 0.4;  // S at 0.4
  s(2, 1) = 0.4;  // L at 0.4
  CHECK(std::abs(defuzzify_cog(aggregate(s, cfg)) - 50.0) < 1e-6);
}

TEST_CASE("cog agrees with a fine Riemann sum") {
  const FuzzyConfig cfg;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    RuleStrengths s;
    for (int k = 0; k < 9; ++k) s(k / 3, k % 3) = u(rng);
    const double got = defuzzify_cog(aggregate(s, cfg));
    const double ref = oracle::cog([&](double g) { return mu_at(g, s, cfg); });
    REQUIRE(std::abs(got - ref) < 1e-3);
  }
}

TEST_CASE("saturated inputs give the VL set") {
  const FuzzyConfig cfg;
  RuleStrengths s = RuleStrengths::Zero();
  s(2, 2) = 1.0;
  const double ref = oracle::cog([&](double g) { return mu_at(g, s, cfg); });
  const double got = infer_grip(1000.0, 1000.0, cfg);
  CHECK(std::abs(got - ref) < 1e-3);
  CHECK(got > 85.0);
  CHECK(got < 90.0);
}

TEST_CASE("command policy only raises the grip") {
  SuppressionController ctl;
  CHECK(ctl.state().g_old == 10.0);
  CHECK_FALSE(ctl.apply_estimate(5.0));
  auto c = ctl.apply_estimate(40.0);
  REQUIRE(c);
  CHECK(c->percent == 40.0);
  c = ctl.apply_estimate(55.0);
  REQUIRE(c);
  CHECK(c->percent == 55.0);
  CHECK_FALSE(ctl.apply_estimate(50.0));
  CHECK(ctl.state().g_old == 55.0);
  c = ctl.apply_estimate(120.0);
  REQUIRE(c);
  CHECK(c->percent == 100.0);
  CHECK(c->estimate == 120.0);
  CHECK_FALSE(ctl.apply_estimate(130.0));
  CHECK(ctl.trace().size() == 6);
}

TEST_CASE("step records inputs and handles no-fire") {
  FuzzyConfig cfg;
  cfg.g_min = 30.0;
  SuppressionController ctl(cfg);
  const auto c = ctl.step(60.0, 30.0);
  REQUIRE(c);
  CHECK(c->percent == doctest::Approx(infer_grip(60.0, 30.0, cfg)));
  CHECK(ctl.trace().back().is_e == 60.0);
  CHECK(ctl.trace().back().commanded);
  CHECK_FALSE(ctl.step(0.0, 0.0));  // VS lands below g_min
  CHECK(ctl.trace().size() == 2);
}

TEST_CASE("grip estimate grows with either input") {
  const FuzzyConfig cfg;
  for (double c = 0.0; c <= 30.0; c += 1.5) {
    double prev = -1.0;
    for (double e = 0.0; e <= 60.0; e += 1.0) {
      const double g = infer_grip(e, c, cfg);
      REQUIRE(g >= prev - 1e-9);
      prev = g;
    }
  }
  for (double e = 0.0; e <= 60.0; e += 3.0) {
    double prev = -1.0;
    for (double c = 0.0; c <= 30.0; c += 0.5) {
      const double g = infer_grip(e, c, cfg);
      REQUIRE(g >= prev - 1e-9);
      prev = g;
    }
  }
}

TEST_CASE("scaling the input ranges and inputs together changes nothing") {
  const FuzzyConfig a = FuzzyConfig::with_ranges(0, 60, 0, 30);
  const FuzzyConfig b = FuzzyConfig::with_ranges(0, 120, 0, 60);
  for (double e = 0.0; e <= 60.0; e += 7.5)
    for (double c = 0.0; c <= 30.0; c += 4.0)
      CHECK(infer_grip(e, c, a) == doctest::Approx(infer_grip(2 * e, 2 * c, b)).epsilon(1e-12));
}

TEST_CASE("output sets and validation") {
  const ForceMFs f = default_force_mfs();
  for (int i = 0; i < 5; ++i) {
    CHECK(f[i].mean == 10.0 + 20.0 * i);
    // Full width at half maximum of 20.
    CHECK(f[i](f[i].mean + 10.0) == doctest::Approx(0.5).epsilon(1e-3));
  }
  FuzzyConfig cfg;
  cfg.g_max = 5.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.cog_resolution = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(force_label_from_string("VL") == ForceLabel::VL);
  CHECK_FALSE(force_label_from_string("XL"));
}

}  // TEST_SUITE
