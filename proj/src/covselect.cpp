#include "stratcause/covselect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

namespace stratcause {

namespace {

// Likelihood-ratio statistic of independence in one two-way table.
struct GAccumulator {
  double statistic = 0.0;
  int dof = 0;

  void add_table(const std::vector<std::vector<double>>& observed) {
    const std::size_t rows = observed.size();
    const std::size_t cols = observed.front().size();
    std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        row_sum[i] += observed[i][j];
        col_sum[j] += observed[i][j];
        total += observed[i][j];
      }
    }
    if (total <= 0.0) return;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        const double o = observed[i][j];
        if (o <= 0.0) continue;
        statistic += 2.0 * o * std::log(o * total / (row_sum[i] * col_sum[j]));
      }
    }
    dof += static_cast<int>((rows - 1) * (cols - 1));
  }
};

struct Spread {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double width() const { return hi - lo; }
};

}  // namespace

std::string CIRelation::to_string() const {
  return kind == Kind::kOutcomeIndepTGivenXS ? "Y _||_ " + t + " | {X, " + s + "}" : "X _||_ " + s + " | " + t;
}

double chi_squared_sf(double statistic, int dof) {
  if (dof <= 0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

CIVerdict ci_check(const StratifiedJoint& joint, const CIRelation& relation, const CIOptions& opts) {
  if (relation.s.empty() || relation.t.empty() || relation.s == relation.t) {
    throw ValidationError("S and T roles must name two distinct covariates");
  }
  const StratifiedJoint st = collapse(joint, {relation.s, relation.t});
  const bool exposure = relation.kind == CIRelation::Kind::kExposureIndepSGivenT;
  CIVerdict verdict{.relation = relation, .mode = opts.mode};

  if (opts.mode == CIMode::kExactProbability) {
    // conditioning level(s) -> spread of the probability that must be constant
    std::map<std::string, Spread> spreads;
    for (const auto& [key, tab] : st.strata()) {
      if (exposure) {
        spreads[key.level(relation.t)].add(tab.p_x());
      } else {
        spreads["x|" + key.level(relation.s)].add(tab.p_y_given_x());
        spreads["x'|" + key.level(relation.s)].add(tab.p_y_given_xp());
      }
    }
    for (const auto& [level, spread] : spreads) verdict.max_deviation = std::max(verdict.max_deviation, spread.width());
    verdict.threshold = opts.tol;
    verdict.holds = verdict.max_deviation <= opts.tol;
    return verdict;
  }

  if (!st.total_n()) throw ValidationError("count-test mode needs the sample size N");
  const double n = static_cast<double>(*st.total_n());
  GAccumulator g;
  if (exposure) {
    // per level of T: exposure (rows) by S (columns)
    std::map<std::string, std::vector<std::vector<double>>> tables;
    for (const auto& [key, tab] : st.strata()) {
      auto& table = tables.try_emplace(key.level(relation.t), 2, std::vector<double>{}).first->second;
      table[0].push_back(n * tab.weight * tab.p_x());
      table[1].push_back(n * tab.weight * tab.p_xp());
    }
    for (const auto& [level, table] : tables) g.add_table(table);
  } else {
    // per level of S and exposure arm: outcome (rows) by T (columns)
    std::map<std::string, std::vector<std::vector<double>>> tables;
    for (const auto& [key, tab] : st.strata()) {
      const std::string s_level = key.level(relation.s);
      auto& exposed = tables.try_emplace("x|" + s_level, 2, std::vector<double>{}).first->second;
      exposed[0].push_back(n * tab.weight * tab.p_xy);
      exposed[1].push_back(n * tab.weight * tab.p_xyp);
      auto& unexposed = tables.try_emplace("x'|" + s_level, 2, std::vector<double>{}).first->second;
      unexposed[0].push_back(n * tab.weight * tab.p_xpy);
      unexposed[1].push_back(n * tab.weight * tab.p_xpyp);
    }
    for (const auto& [level, table] : tables) g.add_table(table);
  }
  verdict.statistic = g.statistic;
  verdict.dof = g.dof;
  verdict.p_value = chi_squared_sf(g.statistic, g.dof);
  verdict.threshold = opts.alpha;
  verdict.holds = verdict.p_value >= opts.alpha;
  return verdict;
}

const Candidate& SelectionReport::candidate(const std::vector<std::string>& stratifier) const {
  std::vector<std::string> sorted = stratifier;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& c : candidates) {
    if (c.stratifier == sorted) return c;
  }
  throw ValidationError("no candidate for the requested stratifier");
}

SelectionReport compare_covariate_sets(const StratifiedJoint& joint, const std::string& s, const std::string& t,
                                       const SelectionOptions& opts) {
  SelectionReport report{.s = s, .t = t};
  const PointOptions point_opts{.n = opts.n, .require_variance = true};
  const std::vector<std::vector<std::string>> stratifiers{{s}, {t}, {s, t}};
  for (const auto& keep : stratifiers) {
    const StratifiedJoint collapsed = collapse(joint, keep);
    report.candidates.push_back({collapsed.covariates(), pn_point(collapsed, point_opts), pns_point(collapsed, point_opts)});
  }

  const CIVerdict outcome = ci_check(joint, {CIRelation::Kind::kOutcomeIndepTGivenXS, s, t}, opts.ci);
  const CIVerdict exposure = ci_check(joint, {CIRelation::Kind::kExposureIndepSGivenT, s, t}, opts.ci);
  report.ci_results = {outcome, exposure};

  const Candidate& c_s = report.candidates[0];
  const Candidate& c_t = report.candidates[1];
  const Candidate& c_st = report.candidates[2];
  auto order = [&](Quantity q, const Candidate& small, const Candidate& large, bool predicted) {
    const Estimate& a = q == Quantity::kPN ? small.pn : small.pns;
    const Estimate& b = q == Quantity::kPN ? large.pn : large.pns;
    OrderingVerdict v{.quantity = q,
                      .smaller = small.stratifier,
                      .larger = large.stratifier,
                      .avar_smaller = *a.avar,
                      .avar_larger = *b.avar,
                      .predicted = predicted};
    v.satisfied = v.avar_smaller <= v.avar_larger + opts.slack;
    if (!predicted) {
      v.note = "not guaranteed: premise does not hold";
    } else {
      v.note = v.satisfied ? "guaranteed and observed" : "guaranteed but violated";
    }
    report.orderings.push_back(std::move(v));
  };
  for (Quantity q : {Quantity::kPN, Quantity::kPNS}) {
    order(q, c_s, c_st, outcome.holds);
    order(q, c_st, c_t, exposure.holds);
    order(q, c_s, c_t, outcome.holds && exposure.holds);
  }

  if (outcome.holds && exposure.holds) {
    for (Quantity q : {Quantity::kPN, Quantity::kPNS}) {
      const Candidate* best = nullptr;
      for (const Candidate* c : {&c_s, &c_st, &c_t}) {
        const double v = *(q == Quantity::kPN ? c->pn : c->pns).avar;
        if (!best || v < *(q == Quantity::kPN ? best->pn : best->pns).avar) best = c;
      }
      report.recommendation[q] = best->stratifier;
    }
  }
  return report;
}

}  // namespace stratcause
