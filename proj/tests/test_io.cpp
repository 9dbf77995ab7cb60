#include <sstream>

#include "doctest.h"
#include "stratcause/io.hpp"
#include "support.hpp"

using namespace stratcause;

TEST_SUITE("io") {

TEST_CASE("columns are located by name") {
  std::istringstream in("count,y,x,region\n4,1,1,north\n1,0,1,north\n2,1,0,north\n3,0,0,north\n");
  const CountTable t = load_counts(in);
  CHECK(t.covariates() == std::vector<std::string>{"region"});
  CHECK(t.count(StratumKey({{"region", "north"}}), ExposureLevel::kExposed, OutcomeLevel::kEvent) == 4);
  CHECK(t.count(StratumKey({{"region", "north"}}), ExposureLevel::kUnexposed, OutcomeLevel::kNoEvent) == 3);
}

TEST_CASE("comments, blank lines and no covariates") {
  std::istringstream in("# pooled\n\nx,y,count\n1,1,10\n1,0,5\n\n0,1,3\n0,0,2\n");
  const CountTable t = load_counts(in);
  CHECK(t.covariates().empty());
  CHECK(t.total() == 20);
  const StratifiedJoint j = to_probabilities(t);
  CHECK(j.at(StratumKey()).p_xy == 0.5);
}

TEST_CASE("malformed rows name the line") {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      load_counts(in, "f.csv");
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("s,x,y,count\na,1,1,x7\n") == "f.csv:2: malformed count 'x7'");
  CHECK(message("s,x,y,count\na,1,1\n").rfind("f.csv:2: expected 4 fields", 0) == 0);
  CHECK(message("s,x,y,count\na,2,1,3\n") == "f.csv:2: unknown x level '2' (expected 1 or 0)");
  CHECK(message("s,x,y,count\n\na,1,1,-3\n") == "f.csv:3: negative count -3");
  CHECK(message("s,y,count\n") == "f.csv:1: header must contain the columns x, y and count");
  CHECK(message("") == "f.csv:0: no header row");
  CHECK_THROWS_AS(load_counts_file("/nonexistent/file.csv"), ParseError);
}

TEST_CASE("count rendering round trips") {
  const CountTable t = load_counts_file(STRATCAUSE_TEST_DATA "/stages.csv");
  std::istringstream again(render_counts(t));
  const CountTable u = load_counts(again);
  CHECK(u.covariates() == t.covariates());
  REQUIRE(u.rows().size() == t.rows().size());
  for (std::size_t i = 0; i < t.rows().size(); ++i) {
    CHECK(u.rows()[i].key == t.rows()[i].key);
    CHECK(u.rows()[i].count == t.rows()[i].count);
  }
}

TEST_CASE("joint and experimental JSON round trip exactly") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const StratifiedJoint j = testing::random_joint(rng, 1 + i % 4);
    const auto text = to_json(j).dump();
    CHECK(joint_from_json(nlohmann::json::parse(text)) == j);
    const ExperimentalQuantities e = testing::random_experimental(rng, j);
    const ExperimentalQuantities back = experimental_from_json(nlohmann::json::parse(to_json(e).dump()), j);
    CHECK(back.per_stratum() == e.per_stratum());
    CHECK(back.marginal() == e.marginal());
  }
}

TEST_CASE("experimental JSON must cover every stratum") {
  const StratifiedJoint j = to_probabilities(load_counts_file(STRATCAUSE_TEST_DATA "/stages.csv"));
  const auto doc = nlohmann::json::parse(R"({"strata": [{"key": {"stage": "s1"}, "p_y_do_x": 0.2, "p_y_do_xprime": 0.3}]})");
  CHECK_THROWS_AS(experimental_from_json(doc, j), ValidationError);
  CHECK_THROWS_AS(experimental_from_json(nlohmann::json::parse(R"({"rows": []})"), j), ParseError);
}

}  // TEST_SUITE
