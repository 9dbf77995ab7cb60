#include <random>

#include "doctest.h"
#include "stratcause/identify.hpp"
#include "stratcause/io.hpp"
#include "stratcause/simulate.hpp"
#include "support.hpp"

using namespace stratcause;

namespace {

// Setting 1 population, frozen from an independent evaluation of the
// identifying formulas at N = 1000.
struct Frozen {
  Stratifier stratifier;
  double pn_avar;
  double pns_avar;
};
const Frozen kSetting1[] = {
    {{"S"}, 0.00340594990382, 0.000909007352941},
    {{"T"}, 0.00600749708723, 0.00139625},
    {{"S", "T"}, 0.00528292936204, 0.00123625},
};

}  // namespace

TEST_SUITE("identify") {

TEST_CASE("setting 1 values and variances") {
  const StratifiedJoint population = scenario_joint(builtin_scenario(1));
  for (const auto& f : kSetting1) {
    const StratifiedJoint j = collapse(population, f.stratifier);
    const PointOptions opts{.n = 1000};
    const Estimate pn = pn_point(j, opts);
    const Estimate pns = pns_point(j, opts);
    CHECK(pn.value == doctest::Approx(-0.174825174825).epsilon(1e-11));
    CHECK(pns.value == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(*pn.avar == doctest::Approx(f.pn_avar).epsilon(1e-10));
    CHECK(*pns.avar == doctest::Approx(f.pns_avar).epsilon(1e-10));
    CHECK(pn.covariates == f.stratifier);
    CHECK(*pn.se() == doctest::Approx(std::sqrt(f.pn_avar)).epsilon(1e-10));
    CHECK_FALSE(pn.warnings.empty());
  }
}

TEST_CASE("variance scales as 1/N") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 50; ++i) {
    const StratifiedJoint j = testing::random_joint(rng, 3);
    const double a = *pn_point(j, {.n = 500}).avar;
    const double b = *pn_point(j, {.n = 2000}).avar;
    CHECK(a == doctest::Approx(4.0 * b).epsilon(1e-13));
    const double c = *pns_point(j, {.n = 500}).avar;
    const double d = *pns_point(j, {.n = 2000}).avar;
    CHECK(c == doctest::Approx(4.0 * d).epsilon(1e-13));
  }
}

TEST_CASE("weighting identity") {
  // sum_s PN(s) P(s|x,y) equals the stratified identifying formula
  std::mt19937_64 rng(43);
  for (int i = 0; i < 100; ++i) {
    const StratifiedJoint j = testing::random_joint(rng, 4);
    const double p_xy = j.pooled().p_xy;
    double weighted = 0.0;
    for (const auto& [key, t] : j.strata()) {
      const double pn_s = (t.p_yp_given_xp() - t.p_yp()) / t.p_xy;
      weighted += pn_s * t.p_xy * t.weight / p_xy;
    }
    CHECK(std::abs(pn_point(j, {.require_variance = false}).value - weighted) < 1e-12);
  }
}

TEST_CASE("sample size handling") {
  std::mt19937_64 rng(47);
  const StratifiedJoint j = testing::random_joint(rng, 2);
  CHECK_THROWS_AS(pn_point(j), ValidationError);
  CHECK_FALSE(pn_point(j, {.require_variance = false}).avar.has_value());
  CHECK_THROWS_AS(pns_point(j, {.n = 0}), ValidationError);
}

TEST_CASE("monotone data: estimate inside the bounds, nothing flagged") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int i = 0; i < 100; ++i) {
    StratifiedJoint::Strata strata;
    const int k = 1 + i % 4;
    for (int s = 0; s < k; ++s) {
      const double px = u(rng);
      double a = u(rng), b = u(rng);
      if (a < b) std::swap(a, b);  // P(y|x,s) >= P(y|x',s)
      strata.emplace(StratumKey({{"S", std::to_string(s)}}),
                     StratumTable{px * a, px * (1 - a), (1 - px) * b, (1 - px) * (1 - b), 1.0 / k});
    }
    const StratifiedJoint j({"S"}, strata, 1000);
    const MonotonicityReport r = monotonicity_diagnostic(j, adjusted_experimental(j));
    CHECK_FALSE(r.any_flagged());
    CHECK(r.pn_inside);
    CHECK(r.pns_inside);
    CHECK(r.pn_value == doctest::Approx(pn_point(j).value).epsilon(1e-12));
    CHECK(r.pns_value == doctest::Approx(pns_point(j).value).epsilon(1e-12));
    CHECK(pn_point(j).warnings.empty());
  }
}

TEST_CASE("stage fixture contradicts no-prevention") {
  const StratifiedJoint j = to_probabilities(load_counts_file(STRATCAUSE_TEST_DATA "/stages.csv"));
  const MonotonicityReport r = monotonicity_diagnostic(j, adjusted_experimental(j));
  REQUIRE(r.strata.size() == 3);
  CHECK(r.strata[0].risk_difference == doctest::Approx(5.0 / 55 - 2.0 / 12).epsilon(1e-14));
  CHECK(r.strata[2].risk_difference == doctest::Approx(9.0 / 15 - 12.0 / 14).epsilon(1e-14));
  CHECK(r.any_flagged());
  CHECK_FALSE(r.pns_inside);
}

}  // TEST_SUITE
