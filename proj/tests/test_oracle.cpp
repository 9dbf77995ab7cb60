#include <random>

#include "doctest.h"
#include "oracle_support.hpp"
#include "stratcause/io.hpp"
#include "stratcause/oracle.hpp"
#include "support.hpp"

using namespace stratcause;
using namespace stratcause::oracle;

TEST_SUITE("oracle") {

TEST_CASE("hand example: polygon extrema") {
  const StratumTable t{0.3, 0.2, 0.1, 0.4, 1.0};
  const ExperimentalPair e{0.5, 0.2};
  const Extrema pn = feasible_extrema(t, e, Quantity::kPN);
  CHECK(pn.free_dimensions == 2);
  CHECK(pn.lower == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(pn.upper == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pn.argmin.valid());
  CHECK(evaluate(pn.argmax, t, Quantity::kPN) == pn.upper);
  const Extrema pns = feasible_extrema(t, e, Quantity::kPNS);
  CHECK(pns.lower == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(pns.upper == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(pns.grid_count > 100);
  CHECK(pns.grid_lower >= pns.lower - 1e-12);
  CHECK(pns.grid_upper <= pns.upper + 1e-12);
  for (const auto& v : feasible_vertices(t, e)) CHECK(v.valid(1e-9));
}

TEST_CASE("closed-form boxes are sharp on random feasible instances") {
  std::mt19937_64 rng(61);
  const OracleOptions opts{.resolution = 1e-2};
  for (int i = 0; i < 200; ++i) {
    const auto g = testing::from_response_types(rng, false);
    for (Quantity q : {Quantity::kPN, Quantity::kPS, Quantity::kPNS}) {
      const Interval box = conditional_interval(q, g.table, g.exp);
      const Extrema ex = feasible_extrema(g.table, g.exp, q, opts);
      CHECK(std::abs(box.lower - ex.lower) <= 2e-3);
      CHECK(std::abs(box.upper - ex.upper) <= 2e-3);
    }
  }
}

TEST_CASE("compatible-range sampling agrees too") {
  std::mt19937_64 rng(67);
  for (int i = 0; i < 100; ++i) {
    const StratifiedJoint j = testing::random_joint(rng, 2);
    const ExperimentalQuantities e = testing::random_experimental(rng, j);
    const VerificationReport r = verify_bounds(j, e, 2e-3, {.resolution = 1e-2});
    CHECK(r.passed());
    CHECK(r.rows.size() == 6);
  }
}

TEST_CASE("stage fixture strata verify") {
  const StratifiedJoint j = to_probabilities(load_counts_file(STRATCAUSE_TEST_DATA "/stages.csv"));
  const VerificationReport r = verify_bounds(j, adjusted_experimental(j), 2e-3);
  CHECK(r.passed());
  CHECK(r.max_discrepancy < 1e-9);
  CHECK(r.failures().empty());
}

TEST_CASE("an injected fault is caught") {
  const StratifiedJoint j = to_probabilities(load_counts_file(STRATCAUSE_TEST_DATA "/stages.csv"));
  const ClosedForm faulty = [](Quantity q, const StratumTable& t, const ExperimentalPair& e, const StratumKey& k) {
    Interval iv = conditional_interval(q, t, e, k);
    if (q == Quantity::kPNS) iv.upper += 0.05;
    return iv;
  };
  const VerificationReport r = verify_bounds(j, adjusted_experimental(j), 2e-3, {}, faulty);
  CHECK_FALSE(r.passed());
  CHECK(r.failures() == "stage=s1/PNS; stage=s2/PNS; stage=s3/PNS");
  CHECK(r.max_discrepancy == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("no-prevention collapses the polygon to the identified values") {
  std::mt19937_64 rng(71);
  const OracleOptions opts{.monotone = true};
  for (int i = 0; i < 100; ++i) {
    const auto g = testing::from_response_types(rng, true);
    const Extrema pn = feasible_extrema(g.table, g.exp, Quantity::kPN, opts);
    const Extrema pns = feasible_extrema(g.table, g.exp, Quantity::kPNS, opts);
    const double pn_identified = ((1.0 - g.exp.p_y_do_xp) - g.table.p_yp()) / g.table.p_xy;
    const double pns_identified = g.exp.p_y_do_x - g.exp.p_y_do_xp;
    CHECK(pn.free_dimensions == 0);
    CHECK(std::abs(pn.lower - pn_identified) <= 2e-3);
    CHECK(std::abs(pn.upper - pn_identified) <= 2e-3);
    CHECK(std::abs(pns.lower - pns_identified) <= 2e-3);
    CHECK(std::abs(pns.upper - pns_identified) <= 2e-3);
  }
}

TEST_CASE("boundary strata") {
  const StratumTable det{0.5, 0.0, 0.0, 0.5, 1.0};
  const Extrema pns = feasible_extrema(det, {1.0, 0.0}, Quantity::kPNS);
  CHECK(pns.lower == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pns.upper == doctest::Approx(1.0).epsilon(1e-12));
  const StratumTable flat{0.25, 0.25, 0.25, 0.25, 1.0};
  const Extrema pn = feasible_extrema(flat, {0.5, 0.5}, Quantity::kPN);
  CHECK(pn.lower == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(pn.upper == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("empty polygon exactly when consistency is violated") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int infeasible = 0;
  for (int i = 0; i < 300; ++i) {
    StratifiedJoint::Strata strata;
    strata.emplace(StratumKey({{"S", "a"}}), testing::random_table(rng));
    const StratifiedJoint j({"S"}, strata);
    const StratumTable& t = j.strata().begin()->second;
    const CompatibleRange r = compatible_range(t);
    const ExperimentalPair e{u(rng), u(rng)};
    // skip draws within 1e-3 of the boundary, where the tolerances differ
    const double margin = std::min({std::abs(e.p_y_do_x - r.do_x_lo), std::abs(e.p_y_do_x - r.do_x_hi),
                                    std::abs(e.p_y_do_xp - r.do_xp_lo), std::abs(e.p_y_do_xp - r.do_xp_hi)});
    if (margin < 1e-3) continue;
    const ExperimentalQuantities eq(j, {{StratumKey({{"S", "a"}}), e}}, Provenance::kMeasuredExperimental);
    const bool violated = !validate_compatibility(j, eq).ok();
    bool empty = false;
    try {
      feasible_extrema(t, e, Quantity::kPNS, {.resolution = 0.05});
    } catch (const IncompatibilityError&) {
      empty = true;
    }
    CHECK(violated == empty);
    infeasible += empty;
  }
  CHECK(infeasible > 50);
}

TEST_CASE("infeasible inputs and bad options") {
  const StratumTable t{0.4, 0.1, 0.2, 0.3, 1.0};
  CHECK_THROWS_AS(feasible_extrema(t, {0.2, 0.5}, Quantity::kPN), IncompatibilityError);
  CHECK_THROWS_AS(feasible_extrema(t, {0.5, 0.5}, Quantity::kPN, {.resolution = 0.5}), ValidationError);
}

}  // TEST_SUITE
