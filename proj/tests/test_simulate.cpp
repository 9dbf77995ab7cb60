#include <map>

#include "doctest.h"
#include "stratcause/simulate.hpp"

using namespace stratcause;

namespace {

bool same_results(const StudyResult& a, const StudyResult& b) {
  if (a.results.size() != b.results.size() || a.discarded != b.discarded) return false;
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    const auto& x = a.results[i];
    const auto& y = b.results[i];
    if (x.mean_estimate != y.mean_estimate || x.empirical_var != y.empirical_var || x.mean_avar != y.mean_avar) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("simulate") {

TEST_CASE("built-in settings") {
  const auto all = builtin_scenarios();
  REQUIRE(all.size() == 4);
  for (const auto& sc : all) CHECK_NOTHROW(sc.validate());
  const Scenario s1 = builtin_scenario(1);
  CHECK(s1.name == "Setting 1");
  CHECK(s1.cell(true, "s1", "t1") == 0.32);
  CHECK(s1.cell(false, "s2", "t2") == 0.32);
  CHECK(s1.outcome(false, "s2") == 0.4);
  CHECK_THROWS_AS(builtin_scenario(5), ValidationError);
  const StratifiedJoint pop = scenario_joint(s1);
  CHECK(pop.size() == 4);
  CHECK(pop.pooled().p_xy == doctest::Approx(0.32 * 0.7 + 0.08 * 0.3 + 0.02 * 0.7 + 0.08 * 0.3).epsilon(1e-14));
}

TEST_CASE("scenario JSON round trip and validation") {
  const Scenario s = builtin_scenario(3);
  const Scenario back = scenario_from_json(nlohmann::json::parse(to_json(s).dump()));
  CHECK(back.name == s.name);
  REQUIRE(back.joint_xst.size() == s.joint_xst.size());
  for (std::size_t i = 0; i < s.joint_xst.size(); ++i) CHECK(back.joint_xst[i].p == s.joint_xst[i].p);

  Scenario bad = s;
  bad.joint_xst[0].p += 0.1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = s;
  bad.outcome_conditionals[0].p_y = 1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK_THROWS_AS(scenario_from_json(nlohmann::json::parse(R"({"joint_xst": 3})")), ParseError);
}

TEST_CASE("stratifier names") {
  CHECK(parse_stratifier("S") == Stratifier{"S"});
  CHECK(parse_stratifier("T,S") == Stratifier{"S", "T"});
  CHECK(parse_stratifier("{S,T}") == Stratifier{"S", "T"});
  CHECK(stratifier_name({"S", "T"}) == "{S,T}");
  CHECK_THROWS_AS(parse_stratifier("S,,T"), ValidationError);
  CHECK_THROWS_AS(parse_stratifier("S,S"), ValidationError);
}

TEST_CASE("sampling is reproducible and complete") {
  const Scenario s = builtin_scenario(1);
  const CountTable a = sample_dataset(s, 500, 7, 3);
  const CountTable b = sample_dataset(s, 500, 7, 3);
  const CountTable c = sample_dataset(s, 500, 7, 4);
  CHECK(a.total() == 500);
  CHECK(a.rows().size() == 16);
  bool all_equal = true, differs = false;
  for (std::size_t i = 0; i < a.rows().size(); ++i) {
    all_equal = all_equal && a.rows()[i].count == b.rows()[i].count;
    differs = differs || a.rows()[i].count != c.rows()[i].count;
  }
  CHECK(all_equal);
  CHECK(differs);
  auto e1 = substream(1, 2, 3);
  auto e2 = substream(1, 2, 3);
  CHECK(e1() == e2());
}

TEST_CASE("large samples recover the population") {
  const Scenario s = builtin_scenario(2);
  const StratifiedJoint pop = scenario_joint(s);
  const StratifiedJoint sample = to_probabilities(sample_dataset(s, 400000, 11));
  for (const auto& [key, t] : pop.strata()) {
    const StratumTable& u = sample.at(key);
    CHECK(std::abs(u.weight - t.weight) < 0.005);
    CHECK(std::abs(u.p_xy - t.p_xy) < 0.01);
    CHECK(std::abs(u.p_xpyp - t.p_xpyp) < 0.01);
  }
}

TEST_CASE("a million draws pin down the cell probabilities") {
  const CountTable counts = sample_dataset(builtin_scenario(1), 1000000, 2);
  const StratumKey key({{"S", "s1"}, {"T", "t1"}});
  const double exposed = static_cast<double>(counts.count(key, ExposureLevel::kExposed, OutcomeLevel::kEvent) +
                                             counts.count(key, ExposureLevel::kExposed, OutcomeLevel::kNoEvent));
  CHECK(std::abs(exposed / 1e6 - 0.32) < 0.002);
}

TEST_CASE("variance study rerun: variance ratios and 1/n shrinkage") {
  for (int k = 1; k <= 4; ++k) {
    std::map<std::pair<int, std::string>, double> at500;
    for (std::int64_t n : {500, 1000, 1500, 2000}) {
      const StudyResult r = replicate_study(builtin_scenario(k), {.n = n, .reps = 5000, .seed = static_cast<std::uint64_t>(100 + k)});
      for (const auto& cell : r.results) {
        const double ratio = cell.empirical_var / cell.population_avar;
        CHECK_MESSAGE(ratio >= 0.9, "setting " << k << " n " << n);
        CHECK_MESSAGE(ratio <= 1.1, "setting " << k << " n " << n);
        const auto id = std::make_pair(static_cast<int>(cell.quantity), stratifier_name(cell.stratifier));
        if (n == 500) at500[id] = cell.empirical_var;
        if (n == 2000) {
          const double shrink = cell.empirical_var / at500.at(id);
          CHECK(shrink >= 0.20);
          CHECK(shrink <= 0.30);
        }
      }
      // population orderings hold exactly, empirical ones up to Monte Carlo slack
      for (Quantity q : {Quantity::kPN, Quantity::kPNS}) {
        const auto& s = r.find(q, {"S"});
        const auto& st = r.find(q, {"S", "T"});
        const auto& t = r.find(q, {"T"});
        CHECK(s.population_avar <= st.population_avar);
        CHECK(st.population_avar <= t.population_avar);
        CHECK(s.empirical_var <= 1.05 * st.empirical_var);
        CHECK(st.empirical_var <= 1.05 * t.empirical_var);
      }
    }
  }
}

TEST_CASE("thread count does not change the results") {
  StudyOptions opts{.n = 1000, .reps = 200, .seed = 7, .threads = 1};
  const StudyResult one = replicate_study(builtin_scenario(1), opts);
  opts.threads = 4;
  const StudyResult four = replicate_study(builtin_scenario(1), opts);
  CHECK(same_results(one, four));
  CHECK(to_json(one).dump() == to_json(four).dump());
  opts.seed = 8;
  CHECK_FALSE(same_results(one, replicate_study(builtin_scenario(1), opts)));
}

TEST_CASE("study reports population values") {
  const StudyResult r = replicate_study(builtin_scenario(1), {.n = 1000, .reps = 50, .seed = 1});
  REQUIRE(r.results.size() == 6);
  const auto& pn_s = r.find(Quantity::kPN, {"S"});
  CHECK(pn_s.population_value == doctest::Approx(-0.174825174825).epsilon(1e-11));
  CHECK(pn_s.population_avar == doctest::Approx(0.00340594990382).epsilon(1e-10));
  CHECK(r.find(Quantity::kPNS, {"T", "S"}).population_avar == doctest::Approx(0.00123625).epsilon(1e-10));
  CHECK(r.attempts == 50 + r.discarded);
}

TEST_CASE("degenerate scenarios are rejected") {
  Scenario s = builtin_scenario(1);
  s.name = "sparse";
  s.joint_xst[2].p = 0.001;  // (x, s1, t2)
  s.joint_xst[0].p += 0.019;
  CHECK_THROWS_AS(replicate_study(s, {.n = 100, .reps = 50, .seed = 3}), ValidationError);
  CHECK_THROWS_AS(replicate_study(builtin_scenario(1), {.n = 100, .reps = 1}), ValidationError);
}

}  // TEST_SUITE
