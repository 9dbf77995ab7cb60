#pragma once

// Seeded Monte Carlo study of the identified PN / PNS estimators.
//
// A Scenario fixes P(x, s, t) over the exposure and two covariates S, T and
// the outcome model P(y | x, s). Each replication draws n subjects, forms
// the plug-in estimators under every requested stratifier and records them;
// the study reports the across-replication variance next to the asymptotic
// variance evaluated on the exact population.
//
// Replication r draws from a stream seeded by (seed, r, attempt) alone, so
// results do not depend on how replications are scheduled over threads.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "stratcause/bounds.hpp"
#include "stratcause/model.hpp"

namespace stratcause {

inline const std::string kCovariateS = "S";
inline const std::string kCovariateT = "T";

struct ScenarioCell {
  bool exposed = true;
  std::string s;
  std::string t;
  double p = 0.0;  // P(x, s, t)
};

struct OutcomeCell {
  bool exposed = true;
  std::string s;
  double p_y = 0.0;  // P(y | x, s)
};

struct Scenario {
  std::string name;
  std::vector<ScenarioCell> joint_xst;
  std::vector<OutcomeCell> outcome_conditionals;

  /// Strictly positive cells summing to one within 1e-9, outcome
  /// probabilities in (0, 1), one outcome entry per (x, s) in use.
  void validate() const;
  double outcome(bool exposed, const std::string& s) const;
  double cell(bool exposed, const std::string& s, const std::string& t) const;
};

/// Settings 1-4 of the reference simulation design, in order.
std::vector<Scenario> builtin_scenarios();
/// 1-based lookup into builtin_scenarios().
Scenario builtin_scenario(int setting);

/// Exact population over covariates {S, T}.
StratifiedJoint scenario_joint(const Scenario& scenario);

nlohmann::json to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& j);

using Stratifier = std::vector<std::string>;
/// "S", "T", "S,T" or "{S,T}".
Stratifier parse_stratifier(std::string_view text);
std::string stratifier_name(const Stratifier& stratifier);  // "S", "T", "{S,T}"

/// 64-bit Mersenne Twister seeded through seed_seq from (seed, stream, attempt).
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t attempt = 0);

/// n independent subjects: (x, s, t) from joint_xst, then y ~ Bernoulli(P(y|x,s)).
/// Every (S, T, x, y) cell of the scenario appears in the table, with zero
/// counts where nothing was drawn.
CountTable sample_dataset(const Scenario& scenario, std::int64_t n, std::uint64_t seed, std::uint64_t stream = 0);

struct ReplicationResult {
  Quantity quantity = Quantity::kPN;
  Stratifier stratifier;
  std::int64_t n = 0;
  std::int64_t reps = 0;
  double mean_estimate = 0.0;
  double empirical_var = 0.0;  // unbiased sample variance over replications
  double mean_avar = 0.0;      // mean of the plug-in a.var across replications
  double population_value = 0.0;
  double population_avar = 0.0;
};

struct StudyOptions {
  std::int64_t n = 1000;
  std::int64_t reps = 5000;
  std::uint64_t seed = 0;
  std::vector<Stratifier> stratifiers{{"S"}, {"T"}, {"S", "T"}};
  unsigned threads = 0;  // 0: hardware concurrency
  double max_discard_rate = 0.10;
};

struct StudyResult {
  std::string scenario;
  std::vector<ReplicationResult> results;  // per stratifier: PN then PNS
  std::int64_t discarded = 0;              // datasets redrawn because of a zero cell
  std::int64_t attempts = 0;

  const ReplicationResult& find(Quantity q, const Stratifier& stratifier) const;
};

StudyResult replicate_study(const Scenario& scenario, const StudyOptions& opts);

nlohmann::json to_json(const StudyResult& study);

}  // namespace stratcause
