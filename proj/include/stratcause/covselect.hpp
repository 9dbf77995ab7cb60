#pragma once

// Choosing between two admissible stratifiers S and T (or both) by the
// asymptotic variance of the identified PN / PNS estimators.
//
// Two conditional independences drive the comparison:
//   Y _||_ T | {X, S}  =>  a.var(S) <= a.var({S,T})
//   X _||_ S | T       =>  a.var({S,T}) <= a.var(T)

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stratcause/identify.hpp"
#include "stratcause/model.hpp"

namespace stratcause {

struct CIRelation {
  enum class Kind {
    kOutcomeIndepTGivenXS,  // Y _||_ T | {X, S}
    kExposureIndepSGivenT,  // X _||_ S | T
  };
  Kind kind = Kind::kOutcomeIndepTGivenXS;
  std::string s;  // covariate playing the S role
  std::string t;  // covariate playing the T role

  std::string to_string() const;
};

enum class CIMode { kExactProbability, kCountTest };

struct CIOptions {
  CIMode mode = CIMode::kExactProbability;
  /// Exact mode: largest allowed spread of the conditional probability that
  /// must be constant (equals total variation for binary X or Y).
  double tol = 1e-9;
  /// Count-test mode significance level.
  double alpha = 0.05;
};

struct CIVerdict {
  CIRelation relation;
  CIMode mode = CIMode::kExactProbability;
  bool holds = false;
  double max_deviation = 0.0;  // exact mode
  double statistic = 0.0;      // count-test mode: G = 2 sum O ln(O/E)
  int dof = 0;
  double p_value = 1.0;
  double threshold = 0.0;  // tol or alpha, whichever applied
};

/// The joint must carry both role covariates; other covariates are
/// marginalized out first.
CIVerdict ci_check(const StratifiedJoint& joint, const CIRelation& relation, const CIOptions& opts = {});

/// Upper tail of the chi-squared distribution with `dof` degrees of freedom.
double chi_squared_sf(double statistic, int dof);

struct Candidate {
  std::vector<std::string> stratifier;
  Estimate pn;
  Estimate pns;
};

struct OrderingVerdict {
  Quantity quantity = Quantity::kPN;
  std::vector<std::string> smaller;  // stratifier predicted to have the smaller a.var
  std::vector<std::string> larger;
  double avar_smaller = 0.0;
  double avar_larger = 0.0;
  bool predicted = false;  // premise verdict held
  bool satisfied = false;  // avar_smaller <= avar_larger (+ slack)
  std::string note;
};

struct SelectionReport {
  std::string s;
  std::string t;
  std::vector<Candidate> candidates;  // S, T, {S,T}
  std::vector<CIVerdict> ci_results;  // Y_||_T|{X,S}, X_||_S|T
  std::vector<OrderingVerdict> orderings;
  /// Smallest-variance stratifier per quantity; only when both premises hold.
  std::map<Quantity, std::vector<std::string>> recommendation;

  const Candidate& candidate(const std::vector<std::string>& stratifier) const;
};

struct SelectionOptions {
  CIOptions ci;
  std::optional<std::int64_t> n;  // defaults to joint.total_n()
  double slack = 1e-12;
};

SelectionReport compare_covariate_sets(const StratifiedJoint& joint, const std::string& s, const std::string& t,
                                       const SelectionOptions& opts = {});

}  // namespace stratcause
