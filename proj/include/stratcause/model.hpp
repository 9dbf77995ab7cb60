#pragma once

// Stratified 2x2 contingency data: keys, per-stratum tables, the joint over
// all strata, counts, and the covariate-adjusted experimental quantities.
//
// Conventions: X is the exposure (x = exposed, x' = unexposed) and Y the
// outcome (y = event, y' = no event). "xp"/"yp" stand for the primed levels.

#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stratcause/errors.hpp"

namespace stratcause {

inline constexpr double kAlgebraTol = 1e-9;
inline constexpr double kDataTol = 1e-3;

/// Value-typed stratum label. Labels are kept sorted by covariate name so
/// that two keys over the same covariates compare equal iff their levels do.
class StratumKey {
 public:
  using Label = std::pair<std::string, std::string>;  // (covariate, level)

  StratumKey() = default;
  explicit StratumKey(std::vector<Label> labels);
  StratumKey(std::initializer_list<Label> labels) : StratumKey(std::vector<Label>(labels)) {}

  const std::vector<Label>& labels() const { return labels_; }
  bool empty() const { return labels_.empty(); }
  std::vector<std::string> covariates() const;

  /// Level of `covariate`; throws if the key does not carry it.
  const std::string& level(const std::string& covariate) const;

  /// Restriction of this key to the covariates in `keep`.
  StratumKey project(const std::vector<std::string>& keep) const;

  /// "S=s1,T=t2"; "(all)" for the empty key.
  std::string to_string() const;

  auto operator<=>(const StratumKey&) const = default;

 private:
  std::vector<Label> labels_;
};

/// Joint distribution of (X, Y) inside one stratum plus the stratum weight P(s).
struct StratumTable {
  double p_xy = 0.0;    // P(x, y | s)
  double p_xyp = 0.0;   // P(x, y' | s)
  double p_xpy = 0.0;   // P(x', y | s)
  double p_xpyp = 0.0;  // P(x', y' | s)
  double weight = 0.0;  // P(s)

  double p_x() const { return p_xy + p_xyp; }
  double p_xp() const { return p_xpy + p_xpyp; }
  double p_y() const { return p_xy + p_xpy; }
  double p_yp() const { return p_xyp + p_xpyp; }
  double p_y_given_x() const { return p_xy / p_x(); }
  double p_y_given_xp() const { return p_xpy / p_xp(); }
  double p_yp_given_x() const { return p_xyp / p_x(); }
  double p_yp_given_xp() const { return p_xpyp / p_xp(); }

  /// Throws ValidationError unless every cell is > 0, the cells sum to one
  /// within `tol`, and weight > 0.
  void validate(double tol = kAlgebraTol) const;

  /// Exchange the roles x <-> x' and y <-> y'. Maps PN onto PS.
  StratumTable swapped() const;

  bool operator==(const StratumTable&) const = default;
};

class StratifiedJoint {
 public:
  using Strata = std::map<StratumKey, StratumTable>;

  /// Validates every stratum, the covariate sets, and that weights sum to one.
  StratifiedJoint(std::vector<std::string> covariates, Strata strata,
                  std::optional<std::int64_t> total_n = std::nullopt);

  const std::vector<std::string>& covariates() const { return covariates_; }
  const Strata& strata() const { return strata_; }
  std::optional<std::int64_t> total_n() const { return total_n_; }
  std::size_t size() const { return strata_.size(); }
  const StratumTable& at(const StratumKey& key) const;

  /// Cell probabilities of the unstratified table, sum_s P(.,.|s) P(s).
  StratumTable pooled() const;

  bool operator==(const StratifiedJoint&) const = default;

 private:
  std::vector<std::string> covariates_;
  Strata strata_;
  std::optional<std::int64_t> total_n_;
};

/// Potential-outcome probabilities P(y_x | s) and P(y_x' | s).
struct ExperimentalPair {
  double p_y_do_x = 0.0;
  double p_y_do_xp = 0.0;

  bool operator==(const ExperimentalPair&) const = default;
};

enum class Provenance { kMeasuredExperimental, kSitaAdjusted };
std::string to_string(Provenance p);

class ExperimentalQuantities {
 public:
  /// `marginal` is derived from the stratum weights of `joint`; every key of
  /// `per_stratum` must be a stratum of `joint` and vice versa.
  ExperimentalQuantities(const StratifiedJoint& joint,
                         std::map<StratumKey, ExperimentalPair> per_stratum,
                         Provenance provenance);

  const std::map<StratumKey, ExperimentalPair>& per_stratum() const { return per_stratum_; }
  const ExperimentalPair& at(const StratumKey& key) const;
  const ExperimentalPair& marginal() const { return marginal_; }
  Provenance provenance() const { return provenance_; }

 private:
  std::map<StratumKey, ExperimentalPair> per_stratum_;
  ExperimentalPair marginal_;
  Provenance provenance_;
};

enum class ExposureLevel { kExposed, kUnexposed };
enum class OutcomeLevel { kEvent, kNoEvent };

struct CountCell {
  StratumKey key;
  ExposureLevel x = ExposureLevel::kExposed;
  OutcomeLevel y = OutcomeLevel::kEvent;
  std::int64_t count = 0;
};

/// Aggregated counts; rows are unique per (key, x, y) and kept in canonical order.
class CountTable {
 public:
  CountTable() = default;
  /// Sums duplicate cells. Throws on negative counts or a zero total.
  CountTable(std::vector<std::string> covariates, const std::vector<CountCell>& rows);

  const std::vector<std::string>& covariates() const { return covariates_; }
  const std::vector<CountCell>& rows() const { return rows_; }
  std::int64_t total() const;
  std::int64_t count(const StratumKey& key, ExposureLevel x, OutcomeLevel y) const;

 private:
  std::vector<std::string> covariates_;
  std::vector<CountCell> rows_;
};

enum class Smoothing { kNone, kAddHalf };

/// Plug-in probabilities P(x,y|s) = cell / stratum total, P(s) = stratum
/// total / N. Zero cells raise PositivityError unless smoothing is kAddHalf.
StratifiedJoint to_probabilities(const CountTable& counts, Smoothing smoothing = Smoothing::kNone);

/// Merge strata that agree on the covariates in `keep`. Empty `keep` yields
/// a single stratum with the empty key.
StratifiedJoint collapse(const StratifiedJoint& joint, const std::vector<std::string>& keep);

/// Ignorability substitution P(y_x|s) = P(y|x,s), P(y_x'|s) = P(y|x',s).
ExperimentalQuantities adjusted_experimental(const StratifiedJoint& joint);

struct CompatibilityViolation {
  StratumKey stratum;
  std::string arm;  // "x" or "x'"
  double lower = 0.0;
  double value = 0.0;
  double upper = 0.0;
};

struct CompatibilityReport {
  std::vector<CompatibilityViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Consistency requires P(x,y|s) <= P(y_x|s) <= 1 - P(x,y'|s) and the mirror
/// condition for x'. Lists every stratum breaching either beyond `tol`.
CompatibilityReport validate_compatibility(const StratifiedJoint& joint,
                                           const ExperimentalQuantities& exp,
                                           double tol = kDataTol);

/// Range of P(y_x|s) and P(y_x'|s) that consistency allows for `table`.
struct CompatibleRange {
  double do_x_lo, do_x_hi, do_xp_lo, do_xp_hi;
};
CompatibleRange compatible_range(const StratumTable& table);

}  // namespace stratcause
