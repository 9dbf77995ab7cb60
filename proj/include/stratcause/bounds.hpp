#pragma once

// Closed-form bounds on the probabilities of causation:
//
//   PN  = P(y'_x' | x, y)      probability of necessity
//   PS  = P(y_x | x', y')      probability of sufficiency
//   PNS = P(y_x, y'_x')        probability of necessity and sufficiency
//
// Three flavours are provided: the box for one stratum (conditional), the
// stratum-weighted summary over a StratifiedJoint (stratified), and the
// unstratified baseline (Tian-Pearl), which is the conditional box evaluated
// on the pooled table with covariate-adjusted marginal experimental inputs.
//
// Every interval records which max/min argument was active in each stratum,
// so reports can show where stratification tightened a bound.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stratcause/model.hpp"

namespace stratcause {

enum class Quantity { kPN, kPS, kPNS };
std::string to_string(Quantity q);
/// Accepts "PN", "PS", "PNS" (case-insensitive).
Quantity parse_quantity(std::string_view text);

enum class Method { kTianPearl, kStratified, kConditional };
std::string to_string(Method m);

/// Human-readable labels of the max (lower) or min (upper) arguments, in the
/// order reported by ActiveTerms.
const std::vector<std::string>& term_labels(Quantity q, bool lower);

struct ActiveTerms {
  StratumKey stratum;
  std::size_t lower_term = 0;
  std::size_t upper_term = 0;
  double lower = 0.0;   // selected max-term (before stratum weighting)
  double upper = 0.0;   // selected min-term (before stratum weighting)
  double weight = 1.0;  // P(s) for stratified intervals, 1 otherwise
};

struct Interval {
  Quantity quantity = Quantity::kPN;
  Method method = Method::kConditional;
  std::optional<StratumKey> stratum;  // set for conditional intervals
  double lower = 0.0;
  double upper = 1.0;
  std::vector<ActiveTerms> terms;

  double width() const { return upper - lower; }
};

struct BoundsOptions {
  /// Pull experimental probabilities into the range consistency allows
  /// before evaluating, instead of raising IncompatibilityError.
  bool clamp = false;
};

/// PN(s) in [max{0, (P(y'_x'|s) - P(y'|s)) / P(x,y|s)}, min{1, (P(y'_x'|s) - P(x',y'|s)) / P(x,y|s)}].
Interval pn_interval_conditional(const StratumTable& stratum, const ExperimentalPair& exp,
                                 const StratumKey& key = {}, const BoundsOptions& opts = {});
/// PN box applied to the table with x <-> x' and y <-> y' exchanged.
Interval ps_interval_conditional(const StratumTable& stratum, const ExperimentalPair& exp,
                                 const StratumKey& key = {}, const BoundsOptions& opts = {});
/// Four-term max/min box for PNS(s).
Interval pns_interval_conditional(const StratumTable& stratum, const ExperimentalPair& exp,
                                  const StratumKey& key = {}, const BoundsOptions& opts = {});
Interval conditional_interval(Quantity q, const StratumTable& stratum, const ExperimentalPair& exp,
                              const StratumKey& key = {}, const BoundsOptions& opts = {});

/// Summarize the per-stratum boxes. PN/PS take max/min inside each stratum
/// and weight by P(s) / P(x,y) (resp. P(x',y')); PNS weights by P(s).
Interval stratified_interval(Quantity q, const StratifiedJoint& joint, const ExperimentalQuantities& exp,
                             const BoundsOptions& opts = {});

Interval tian_pearl_interval(Quantity q, const StratumTable& unstratified, const ExperimentalPair& marginal,
                             const BoundsOptions& opts = {});
/// Baseline on collapse(joint, {}) with exp.marginal().
Interval tian_pearl_interval(Quantity q, const StratifiedJoint& joint, const ExperimentalQuantities& exp,
                             const BoundsOptions& opts = {});

/// Experimental pair seen from the swapped table: (1 - P(y_x'|s), 1 - P(y_x|s)).
ExperimentalPair swapped(const ExperimentalPair& exp);

}  // namespace stratcause
