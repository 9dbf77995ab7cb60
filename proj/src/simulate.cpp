#include "stratcause/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>
#include <thread>

#include "stratcause/identify.hpp"

namespace stratcause {

using nlohmann::json;

namespace {

double uniform01(std::mt19937_64& engine) { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }

StratumKey st_key(const std::string& s, const std::string& t) {
  return StratumKey({{kCovariateS, s}, {kCovariateT, t}});
}

// Flat sampler over the (x, s, t) cells with their outcome probabilities.
struct Sampler {
  std::vector<double> cumulative;
  std::vector<double> p_y;
  std::vector<StratumKey> keys;
  std::vector<bool> exposed;

  explicit Sampler(const Scenario& sc) {
    double acc = 0.0;
    for (const auto& c : sc.joint_xst) {
      acc += c.p;
      cumulative.push_back(acc);
      p_y.push_back(sc.outcome(c.exposed, c.s));
      keys.push_back(st_key(c.s, c.t));
      exposed.push_back(c.exposed);
    }
    cumulative.back() = 1.0;
  }

  // counts[2 * cell + (y ? 0 : 1)]
  std::vector<std::int64_t> draw(std::int64_t n, std::mt19937_64& engine) const {
    std::vector<std::int64_t> counts(2 * cumulative.size(), 0);
    for (std::int64_t i = 0; i < n; ++i) {
      const double u = uniform01(engine);
      const auto cell = static_cast<std::size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end() - 1, u) - cumulative.begin());
      const bool y = uniform01(engine) < p_y[cell];
      ++counts[2 * cell + (y ? 0 : 1)];
    }
    return counts;
  }

  CountTable table(const std::vector<std::int64_t>& counts, const Stratifier& keep) const {
    std::vector<CountCell> rows;
    rows.reserve(counts.size());
    for (std::size_t cell = 0; cell < keys.size(); ++cell) {
      const StratumKey key = keys[cell].project(keep);
      const ExposureLevel x = exposed[cell] ? ExposureLevel::kExposed : ExposureLevel::kUnexposed;
      rows.push_back({key, x, OutcomeLevel::kEvent, counts[2 * cell]});
      rows.push_back({key, x, OutcomeLevel::kNoEvent, counts[2 * cell + 1]});
    }
    return CountTable(keep, rows);
  }
};

struct RepOutcome {
  std::vector<double> pn, pn_avar, pns, pns_avar;  // one entry per stratifier
  std::int64_t discarded = 0;
};

std::vector<double> column(const std::vector<RepOutcome>& reps, std::vector<double> RepOutcome::*field,
                           std::size_t k) {
  std::vector<double> out;
  out.reserve(reps.size());
  for (const auto& r : reps) out.push_back((r.*field)[k]);
  return out;
}

std::pair<double, double> mean_and_variance(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, ss / static_cast<double>(xs.size() - 1)};
}

double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

constexpr std::int64_t kMaxAttemptsPerReplication = 1000;

}  // namespace

void Scenario::validate() const {
  if (joint_xst.empty()) throw ValidationError("scenario '" + name + "' has no cells");
  double total = 0.0;
  std::set<std::tuple<bool, std::string, std::string>> seen;
  for (const auto& c : joint_xst) {
    if (!(c.p > 0.0)) throw ValidationError("scenario '" + name + "': P(x,s,t) must be strictly positive");
    if (!seen.emplace(c.exposed, c.s, c.t).second) {
      throw ValidationError("scenario '" + name + "': duplicate cell (" + c.s + ", " + c.t + ")");
    }
    total += c.p;
    const double p = outcome(c.exposed, c.s);
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("scenario '" + name + "': P(y|x,s) must lie in (0, 1)");
  }
  if (std::abs(total - 1.0) > kAlgebraTol) {
    throw ValidationError("scenario '" + name + "': P(x,s,t) sums to " + std::to_string(total));
  }
  // every (s, t) needs both exposure arms for a strictly positive stratum table
  for (const auto& c : joint_xst) {
    if (!seen.count({!c.exposed, c.s, c.t})) {
      throw ValidationError("scenario '" + name + "': stratum (" + c.s + ", " + c.t + ") lacks one exposure arm");
    }
  }
}

double Scenario::outcome(bool exposed, const std::string& s) const {
  for (const auto& o : outcome_conditionals) {
    if (o.exposed == exposed && o.s == s) return o.p_y;
  }
  throw ValidationError("scenario '" + name + "' has no outcome probability for (" + (exposed ? "x" : "x'") + ", " +
                        s + ")");
}

double Scenario::cell(bool exposed, const std::string& s, const std::string& t) const {
  for (const auto& c : joint_xst) {
    if (c.exposed == exposed && c.s == s && c.t == t) return c.p;
  }
  throw ValidationError("scenario '" + name + "' has no cell (" + s + ", " + t + ")");
}

std::vector<Scenario> builtin_scenarios() {
  // columns (t1,s1) (t1,s2) (t2,s1) (t2,s2); rows x then x'
  const double table[4][2][4] = {
      {{0.32, 0.08, 0.02, 0.08}, {0.08, 0.02, 0.08, 0.32}},
      {{0.20, 0.05, 0.04, 0.16}, {0.20, 0.05, 0.06, 0.24}},
      {{0.20, 0.20, 0.04, 0.06}, {0.05, 0.05, 0.16, 0.24}},
      {{0.10, 0.10, 0.10, 0.15}, {0.15, 0.15, 0.10, 0.15}},
  };
  const char* t_levels[4] = {"t1", "t1", "t2", "t2"};
  const char* s_levels[4] = {"s1", "s2", "s1", "s2"};
  std::vector<Scenario> out;
  for (int k = 0; k < 4; ++k) {
    Scenario sc{.name = "Setting " + std::to_string(k + 1)};
    for (int arm = 0; arm < 2; ++arm) {
      for (int col = 0; col < 4; ++col) {
        sc.joint_xst.push_back({arm == 0, s_levels[col], t_levels[col], table[k][arm][col]});
      }
    }
    sc.outcome_conditionals = {{true, "s1", 0.7}, {true, "s2", 0.3}, {false, "s1", 0.8}, {false, "s2", 0.4}};
    out.push_back(std::move(sc));
  }
  return out;
}

Scenario builtin_scenario(int setting) {
  if (setting < 1 || setting > 4) throw ValidationError("built-in setting must be 1, 2, 3 or 4");
  return builtin_scenarios()[static_cast<std::size_t>(setting - 1)];
}

StratifiedJoint scenario_joint(const Scenario& sc) {
  sc.validate();
  std::map<StratumKey, StratumTable> strata;
  for (const auto& c : sc.joint_xst) {
    StratumTable& t = strata[st_key(c.s, c.t)];
    const double p_y = sc.outcome(c.exposed, c.s);
    // accumulate joint mass P(x, y, s, t); normalized below
    if (c.exposed) {
      t.p_xy += c.p * p_y;
      t.p_xyp += c.p * (1.0 - p_y);
    } else {
      t.p_xpy += c.p * p_y;
      t.p_xpyp += c.p * (1.0 - p_y);
    }
    t.weight += c.p;
  }
  for (auto& [key, t] : strata) {
    t.p_xy /= t.weight;
    t.p_xyp /= t.weight;
    t.p_xpy /= t.weight;
    t.p_xpyp /= t.weight;
  }
  return StratifiedJoint({kCovariateS, kCovariateT}, std::move(strata));
}

json to_json(const Scenario& sc) {
  json cells = json::array();
  for (const auto& c : sc.joint_xst) cells.push_back({{"x", c.exposed ? 1 : 0}, {"s", c.s}, {"t", c.t}, {"p", c.p}});
  json outcomes = json::array();
  for (const auto& o : sc.outcome_conditionals) {
    outcomes.push_back({{"x", o.exposed ? 1 : 0}, {"s", o.s}, {"p_y", o.p_y}});
  }
  return {{"name", sc.name}, {"joint_xst", std::move(cells)}, {"outcome_conditionals", std::move(outcomes)}};
}

Scenario scenario_from_json(const json& j) {
  auto exposed = [](const json& x) {
    const int v = x.get<int>();
    if (v != 0 && v != 1) throw ParseError("scenario: x must be 1 or 0");
    return v == 1;
  };
  try {
    Scenario sc{.name = j.value("name", std::string("custom"))};
    for (const auto& c : j.at("joint_xst")) {
      sc.joint_xst.push_back(
          {exposed(c.at("x")), c.at("s").get<std::string>(), c.at("t").get<std::string>(), c.at("p").get<double>()});
    }
    for (const auto& o : j.at("outcome_conditionals")) {
      sc.outcome_conditionals.push_back({exposed(o.at("x")), o.at("s").get<std::string>(), o.at("p_y").get<double>()});
    }
    sc.validate();
    return sc;
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario JSON: ") + e.what());
  }
}

Stratifier parse_stratifier(std::string_view text) {
  std::string cleaned;
  for (char c : text) {
    if (c != '{' && c != '}' && c != ' ') cleaned += c;
  }
  Stratifier out;
  std::size_t start = 0;
  while (start <= cleaned.size()) {
    const auto comma = cleaned.find(',', start);
    std::string part = cleaned.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (part.empty()) throw ValidationError("malformed stratifier '" + std::string(text) + "'");
    out.push_back(std::move(part));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw ValidationError("stratifier '" + std::string(text) + "' repeats a covariate");
  }
  return out;
}

std::string stratifier_name(const Stratifier& stratifier) {
  if (stratifier.size() == 1) return stratifier.front();
  std::string out = "{";
  for (std::size_t i = 0; i < stratifier.size(); ++i) out += (i ? "," : "") + stratifier[i];
  return out + "}";
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t attempt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(attempt), static_cast<std::uint32_t>(attempt >> 32)};
  return std::mt19937_64(seq);
}

CountTable sample_dataset(const Scenario& scenario, std::int64_t n, std::uint64_t seed, std::uint64_t stream) {
  if (n < 1) throw ValidationError("sample size must be at least 1");
  scenario.validate();
  const Sampler sampler(scenario);
  auto engine = substream(seed, stream);
  return sampler.table(sampler.draw(n, engine), {kCovariateS, kCovariateT});
}

const ReplicationResult& StudyResult::find(Quantity q, const Stratifier& stratifier) const {
  Stratifier sorted = stratifier;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& r : results) {
    if (r.quantity == q && r.stratifier == sorted) return r;
  }
  throw ValidationError("no result for " + to_string(q) + " under " + stratifier_name(sorted));
}

StudyResult replicate_study(const Scenario& scenario, const StudyOptions& opts) {
  if (opts.reps < 2) throw ValidationError("at least two replications are required");
  if (opts.n < 1) throw ValidationError("sample size must be at least 1");
  if (opts.stratifiers.empty()) throw ValidationError("no stratifiers requested");
  scenario.validate();

  std::vector<Stratifier> stratifiers;
  for (Stratifier s : opts.stratifiers) {
    std::sort(s.begin(), s.end());
    for (const auto& name : s) {
      if (name != kCovariateS && name != kCovariateT) {
        throw ValidationError("stratifier covariate '" + name + "' is not S or T");
      }
    }
    stratifiers.push_back(std::move(s));
  }

  const Sampler sampler(scenario);
  const PointOptions point_opts{.n = opts.n};
  const std::size_t k = stratifiers.size();
  const auto reps = static_cast<std::size_t>(opts.reps);
  std::vector<RepOutcome> outcomes(reps);

  auto run_one = [&](std::size_t r) {
    RepOutcome& out = outcomes[r];
    for (std::int64_t attempt = 0; attempt < kMaxAttemptsPerReplication; ++attempt) {
      auto engine = substream(opts.seed, r, static_cast<std::uint64_t>(attempt));
      const auto counts = sampler.draw(opts.n, engine);
      std::vector<StratifiedJoint> joints;
      try {
        for (const auto& s : stratifiers) joints.push_back(to_probabilities(sampler.table(counts, s)));
      } catch (const PositivityError&) {
        ++out.discarded;
        continue;
      }
      for (std::size_t i = 0; i < k; ++i) {
        const Estimate pn = pn_point(joints[i], point_opts);
        const Estimate pns = pns_point(joints[i], point_opts);
        out.pn.push_back(pn.value);
        out.pn_avar.push_back(*pn.avar);
        out.pns.push_back(pns.value);
        out.pns_avar.push_back(*pns.avar);
      }
      return;
    }
  };

  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, reps));
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t r = w; r < reps; r += threads) run_one(r);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  StudyResult study{.scenario = scenario.name};
  for (std::size_t r = 0; r < reps; ++r) {
    if (outcomes[r].pn.empty()) {
      throw ValidationError("degenerate scenario '" + scenario.name + "': replication " + std::to_string(r) +
                            " kept drawing zero cells");
    }
    study.discarded += outcomes[r].discarded;
  }
  study.attempts = opts.reps + study.discarded;
  const double rate = static_cast<double>(study.discarded) / static_cast<double>(study.attempts);
  if (rate > opts.max_discard_rate) {
    throw ValidationError("degenerate scenario '" + scenario.name + "': " + std::to_string(study.discarded) + " of " +
                          std::to_string(study.attempts) + " datasets had a zero cell");
  }

  const StratifiedJoint population = scenario_joint(scenario);
  for (std::size_t i = 0; i < k; ++i) {
    const StratifiedJoint pop = collapse(population, stratifiers[i]);
    for (Quantity q : {Quantity::kPN, Quantity::kPNS}) {
      const bool is_pn = q == Quantity::kPN;
      const Estimate exact = is_pn ? pn_point(pop, point_opts) : pns_point(pop, point_opts);
      const auto [mean, var] = mean_and_variance(column(outcomes, is_pn ? &RepOutcome::pn : &RepOutcome::pns, i));
      study.results.push_back({.quantity = q,
                               .stratifier = stratifiers[i],
                               .n = opts.n,
                               .reps = opts.reps,
                               .mean_estimate = mean,
                               .empirical_var = var,
                               .mean_avar = mean_of(column(outcomes, is_pn ? &RepOutcome::pn_avar : &RepOutcome::pns_avar, i)),
                               .population_value = exact.value,
                               .population_avar = *exact.avar});
    }
  }
  return study;
}

json to_json(const StudyResult& study) {
  json results = json::array();
  for (const auto& r : study.results) {
    results.push_back({{"quantity", to_string(r.quantity)},
                       {"stratifier", stratifier_name(r.stratifier)},
                       {"n", r.n},
                       {"reps", r.reps},
                       {"mean_estimate", r.mean_estimate},
                       {"empirical_var", r.empirical_var},
                       {"mean_avar", r.mean_avar},
                       {"population_value", r.population_value},
                       {"population_avar", r.population_avar},
                       {"ratio", r.empirical_var / r.population_avar}});
  }
  return {{"scenario", study.scenario},
          {"results", std::move(results)},
          {"discarded", study.discarded},
          {"attempts", study.attempts}};
}

}  // namespace stratcause
