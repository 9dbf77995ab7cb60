#include "stratcause/report.hpp"

#include "stratcause/io.hpp"
#include "stratcause/simulate.hpp"

namespace stratcause {

using nlohmann::json;

namespace {

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

json to_json(const Interval& iv) {
  json terms = json::array();
  const auto& lo_labels = term_labels(iv.quantity, true);
  const auto& hi_labels = term_labels(iv.quantity, false);
  for (const auto& t : iv.terms) {
    terms.push_back({{"stratum", to_json(t.stratum)},
                     {"lower_term", t.lower_term},
                     {"lower_label", lo_labels.at(t.lower_term)},
                     {"lower", t.lower},
                     {"upper_term", t.upper_term},
                     {"upper_label", hi_labels.at(t.upper_term)},
                     {"upper", t.upper},
                     {"weight", t.weight}});
  }
  return {{"quantity", to_string(iv.quantity)},
          {"method", to_string(iv.method)},
          {"stratum", iv.stratum ? to_json(*iv.stratum) : json(nullptr)},
          {"lower", iv.lower},
          {"upper", iv.upper},
          {"terms", std::move(terms)}};
}

json to_json(const Estimate& est) {
  return {{"quantity", to_string(est.quantity)},
          {"value", est.value},
          {"avar", optional_json(est.avar)},
          {"se", optional_json(est.se())},
          {"n", optional_json(est.n)},
          {"stratifier", est.covariates},
          {"warnings", est.warnings}};
}

json to_json(const MonotonicityReport& report) {
  json strata = json::array();
  for (const auto& row : report.strata) {
    strata.push_back(
        {{"stratum", to_json(row.stratum)}, {"risk_difference", row.risk_difference}, {"flagged", row.flagged}});
  }
  return {{"strata", std::move(strata)},
          {"any_flagged", report.any_flagged()},
          {"pn_value", report.pn_value},
          {"pns_value", report.pns_value},
          {"pn_inside_stratified", report.pn_inside},
          {"pns_inside_stratified", report.pns_inside}};
}

json to_json(const CIVerdict& v) {
  const bool exact = v.mode == CIMode::kExactProbability;
  return {{"relation", v.relation.to_string()},
          {"mode", exact ? "exact-probability" : "count-test"},
          {"holds", v.holds},
          {"max_deviation", exact ? json(v.max_deviation) : json(nullptr)},
          {"statistic", exact ? json(nullptr) : json(v.statistic)},
          {"dof", exact ? json(nullptr) : json(v.dof)},
          {"p_value", exact ? json(nullptr) : json(v.p_value)},
          {"threshold", v.threshold}};
}

json to_json(const SelectionReport& report) {
  json candidates = json::array();
  for (const auto& c : report.candidates) {
    candidates.push_back({{"stratifier", stratifier_name(c.stratifier)}, {"pn", to_json(c.pn)}, {"pns", to_json(c.pns)}});
  }
  json cis = json::array();
  for (const auto& v : report.ci_results) cis.push_back(to_json(v));
  json orderings = json::array();
  for (const auto& o : report.orderings) {
    orderings.push_back({{"quantity", to_string(o.quantity)},
                         {"smaller", stratifier_name(o.smaller)},
                         {"larger", stratifier_name(o.larger)},
                         {"avar_smaller", o.avar_smaller},
                         {"avar_larger", o.avar_larger},
                         {"predicted", o.predicted},
                         {"satisfied", o.satisfied},
                         {"note", o.note}});
  }
  json recommendation = json::object();
  for (Quantity q : {Quantity::kPN, Quantity::kPNS}) {
    auto it = report.recommendation.find(q);
    recommendation[to_string(q)] = it == report.recommendation.end() ? json(nullptr) : json(stratifier_name(it->second));
  }
  return {{"s", report.s},
          {"t", report.t},
          {"candidates", std::move(candidates)},
          {"ci_results", std::move(cis)},
          {"ordering_verdicts", std::move(orderings)},
          {"recommendation", std::move(recommendation)}};
}

json to_json(const oracle::VerificationReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"stratum", to_json(r.stratum)},
                    {"quantity", to_string(r.quantity)},
                    {"closed_form", {r.closed_lower, r.closed_upper}},
                    {"oracle", {r.oracle_lower, r.oracle_upper}},
                    {"discrepancy", r.discrepancy},
                    {"pass", r.pass}});
  }
  return {{"rows", std::move(rows)},
          {"max_discrepancy", report.max_discrepancy},
          {"tol", report.tol},
          {"passed", report.passed()}};
}

json to_json(const CompatibilityReport& report) {
  json violations = json::array();
  for (const auto& v : report.violations) {
    violations.push_back({{"stratum", to_json(v.stratum)},
                          {"arm", v.arm},
                          {"lower", v.lower},
                          {"value", v.value},
                          {"upper", v.upper}});
  }
  return {{"ok", report.ok()}, {"violations", std::move(violations)}};
}

}  // namespace stratcause
