#pragma once

// Point identification of PN and PNS under (conditional) monotonicity, i.e.
// no individual is protected by exposure, together with the asymptotic
// variances of the plug-in estimators.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stratcause/bounds.hpp"
#include "stratcause/model.hpp"

namespace stratcause {

struct Estimate {
  Quantity quantity = Quantity::kPN;
  double value = 0.0;
  std::optional<double> avar;  // probability^2 units at sample size n
  std::optional<std::int64_t> n;
  std::vector<std::string> covariates;  // stratifier
  std::vector<std::string> warnings;

  std::optional<double> se() const;
};

struct PointOptions {
  /// Sample size for the variance; defaults to joint.total_n().
  std::optional<std::int64_t> n;
  /// Raise if no sample size is available. When false the estimate simply
  /// carries no variance.
  bool require_variance = true;
};

/// PN_s = sum_s (P(y'|x',s) - P(y'|s)) P(s) / P(x,y), with
/// a.var = sum_s [(1-PN_s)^2 P(y'|x,s)P(y|x,s) / (N P(x,s))
///               + P(y'|x',s)P(y|x',s) / (N P(x',s))] (P(x,s)/P(x,y))^2.
Estimate pn_point(const StratifiedJoint& joint, const PointOptions& opts = {});

/// PNS_s = sum_s (P(y|x,s) - P(y|x',s)) P(s), with
/// a.var = sum_s [P(y'|x,s)P(y|x,s) / (N P(x,s)) + P(y'|x',s)P(y|x',s) / (N P(x',s))] P(s)^2.
Estimate pns_point(const StratifiedJoint& joint, const PointOptions& opts = {});

struct MonotonicityRow {
  StratumKey stratum;
  double risk_difference = 0.0;  // P(y_x|s) - P(y_x'|s)
  bool flagged = false;          // negative: contradicts no-prevention
};

struct MonotonicityReport {
  std::vector<MonotonicityRow> strata;
  // Values the identifying formulas give with the supplied experimental
  // quantities (they coincide with pn_point / pns_point under adjustment).
  double pn_value = 0.0;
  double pns_value = 0.0;
  Interval pn_interval;
  Interval pns_interval;
  bool pn_inside = false;
  bool pns_inside = false;

  bool any_flagged() const;
};

MonotonicityReport monotonicity_diagnostic(const StratifiedJoint& joint, const ExperimentalQuantities& exp);

}  // namespace stratcause
