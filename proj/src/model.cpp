#include "stratcause/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

namespace stratcause {

StratumKey::StratumKey(std::vector<Label> labels) : labels_(std::move(labels)) {
  std::sort(labels_.begin(), labels_.end());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].first.empty()) throw ValidationError("stratum key has an empty covariate name");
    if (i > 0 && labels_[i].first == labels_[i - 1].first) {
      throw ValidationError("covariate '" + labels_[i].first + "' appears twice in a stratum key");
    }
  }
}

std::vector<std::string> StratumKey::covariates() const {
  std::vector<std::string> names;
  names.reserve(labels_.size());
  for (const auto& [name, level] : labels_) names.push_back(name);
  return names;
}

const std::string& StratumKey::level(const std::string& covariate) const {
  for (const auto& [name, level] : labels_) {
    if (name == covariate) return level;
  }
  throw ValidationError("stratum " + to_string() + " has no covariate '" + covariate + "'");
}

StratumKey StratumKey::project(const std::vector<std::string>& keep) const {
  std::vector<Label> kept;
  for (const auto& label : labels_) {
    if (std::find(keep.begin(), keep.end(), label.first) != keep.end()) kept.push_back(label);
  }
  return StratumKey(std::move(kept));
}

std::string StratumKey::to_string() const {
  if (labels_.empty()) return "(all)";
  std::string out;
  for (const auto& [name, level] : labels_) {
    if (!out.empty()) out += ',';
    out += name + '=' + level;
  }
  return out;
}

void StratumTable::validate(double tol) const {
  const double cells[] = {p_xy, p_xyp, p_xpy, p_xpyp};
  for (double c : cells) {
    if (!(c > 0.0)) throw PositivityError("cell probability " + std::to_string(c) + " is not strictly positive");
  }
  const double total = p_xy + p_xyp + p_xpy + p_xpyp;
  if (std::abs(total - 1.0) > tol) {
    throw ValidationError("cell probabilities sum to " + std::to_string(total) + ", expected 1");
  }
  if (!(weight > 0.0)) throw ValidationError("stratum weight must be positive");
}

StratumTable StratumTable::swapped() const {
  return StratumTable{.p_xy = p_xpyp, .p_xyp = p_xpy, .p_xpy = p_xyp, .p_xpyp = p_xy, .weight = weight};
}

namespace {

std::vector<std::string> sorted_unique(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
    throw ValidationError("duplicate covariate name");
  }
  return names;
}

}  // namespace

StratifiedJoint::StratifiedJoint(std::vector<std::string> covariates, Strata strata,
                                 std::optional<std::int64_t> total_n)
    : covariates_(sorted_unique(std::move(covariates))), strata_(std::move(strata)), total_n_(total_n) {
  if (strata_.empty()) throw ValidationError("stratified joint has no strata");
  if (total_n_ && *total_n_ <= 0) throw ValidationError("total N must be positive");
  double weight_sum = 0.0;
  for (const auto& [key, table] : strata_) {
    if (key.covariates() != covariates_) {
      throw ValidationError("stratum " + key.to_string() + " does not match the joint's covariate list");
    }
    try {
      table.validate();
    } catch (const PositivityError& e) {
      throw PositivityError("stratum " + key.to_string() + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("stratum " + key.to_string() + ": " + e.what());
    }
    weight_sum += table.weight;
  }
  if (std::abs(weight_sum - 1.0) > kAlgebraTol) {
    throw ValidationError("stratum weights sum to " + std::to_string(weight_sum) + ", expected 1");
  }
}

const StratumTable& StratifiedJoint::at(const StratumKey& key) const {
  auto it = strata_.find(key);
  if (it == strata_.end()) throw ValidationError("unknown stratum " + key.to_string());
  return it->second;
}

StratumTable StratifiedJoint::pooled() const {
  StratumTable out;
  for (const auto& [key, t] : strata_) {
    out.p_xy += t.p_xy * t.weight;
    out.p_xyp += t.p_xyp * t.weight;
    out.p_xpy += t.p_xpy * t.weight;
    out.p_xpyp += t.p_xpyp * t.weight;
    out.weight += t.weight;
  }
  return out;
}

std::string to_string(Provenance p) {
  return p == Provenance::kMeasuredExperimental ? "measured-experimental" : "sita-adjusted";
}

ExperimentalQuantities::ExperimentalQuantities(const StratifiedJoint& joint,
                                               std::map<StratumKey, ExperimentalPair> per_stratum,
                                               Provenance provenance)
    : per_stratum_(std::move(per_stratum)), provenance_(provenance) {
  if (per_stratum_.size() != joint.size()) {
    throw ValidationError("experimental quantities cover " + std::to_string(per_stratum_.size()) +
                          " strata but the joint has " + std::to_string(joint.size()));
  }
  for (const auto& [key, pair] : per_stratum_) {
    const StratumTable& table = joint.at(key);
    for (double p : {pair.p_y_do_x, pair.p_y_do_xp}) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError("stratum " + key.to_string() + ": experimental probability " + std::to_string(p) +
                              " outside [0, 1]");
      }
    }
    marginal_.p_y_do_x += pair.p_y_do_x * table.weight;
    marginal_.p_y_do_xp += pair.p_y_do_xp * table.weight;
  }
}

const ExperimentalPair& ExperimentalQuantities::at(const StratumKey& key) const {
  auto it = per_stratum_.find(key);
  if (it == per_stratum_.end()) throw ValidationError("no experimental quantities for stratum " + key.to_string());
  return it->second;
}

CountTable::CountTable(std::vector<std::string> covariates, const std::vector<CountCell>& rows)
    : covariates_(sorted_unique(std::move(covariates))) {
  std::map<std::tuple<StratumKey, ExposureLevel, OutcomeLevel>, std::int64_t> cells;
  std::int64_t total = 0;
  for (const auto& row : rows) {
    if (row.count < 0) throw ValidationError("negative count in stratum " + row.key.to_string());
    if (row.key.covariates() != covariates_) {
      throw ValidationError("count row " + row.key.to_string() + " does not match the covariate list");
    }
    cells[{row.key, row.x, row.y}] += row.count;
    total += row.count;
  }
  if (total < 1) throw ValidationError("count table has total zero");
  rows_.reserve(cells.size());
  for (const auto& [cell, count] : cells) {
    rows_.push_back(CountCell{std::get<0>(cell), std::get<1>(cell), std::get<2>(cell), count});
  }
}

std::int64_t CountTable::total() const {
  std::int64_t total = 0;
  for (const auto& row : rows_) total += row.count;
  return total;
}

std::int64_t CountTable::count(const StratumKey& key, ExposureLevel x, OutcomeLevel y) const {
  for (const auto& row : rows_) {
    if (row.key == key && row.x == x && row.y == y) return row.count;
  }
  return 0;
}

StratifiedJoint to_probabilities(const CountTable& counts, Smoothing smoothing) {
  // cells in order (x,y), (x,y'), (x',y), (x',y')
  std::map<StratumKey, std::array<double, 4>> cells;
  for (const auto& row : counts.rows()) {
    auto& c = cells[row.key];
    const int idx = (row.x == ExposureLevel::kExposed ? 0 : 2) + (row.y == OutcomeLevel::kEvent ? 0 : 1);
    c[idx] += static_cast<double>(row.count);
  }
  const double add = smoothing == Smoothing::kAddHalf ? 0.5 : 0.0;
  double grand = 0.0;
  for (auto& [key, c] : cells) {
    for (double& v : c) {
      v += add;
      if (!(v > 0.0)) throw PositivityError("stratum " + key.to_string() + " contains a zero cell");
      grand += v;
    }
  }
  StratifiedJoint::Strata strata;
  for (const auto& [key, c] : cells) {
    const double total = c[0] + c[1] + c[2] + c[3];
    strata.emplace(key, StratumTable{.p_xy = c[0] / total,
                                     .p_xyp = c[1] / total,
                                     .p_xpy = c[2] / total,
                                     .p_xpyp = c[3] / total,
                                     .weight = total / grand});
  }
  return StratifiedJoint(counts.covariates(), std::move(strata), counts.total());
}

StratifiedJoint collapse(const StratifiedJoint& joint, const std::vector<std::string>& keep) {
  for (const auto& name : keep) {
    const auto& have = joint.covariates();
    if (std::find(have.begin(), have.end(), name) == have.end()) {
      throw ValidationError("unknown covariate '" + name + "'");
    }
  }
  std::map<StratumKey, std::vector<const StratumTable*>> groups;
  for (const auto& [key, table] : joint.strata()) groups[key.project(keep)].push_back(&table);

  StratifiedJoint::Strata merged;
  for (const auto& [key, members] : groups) {
    if (members.size() == 1) {
      merged.emplace(key, *members.front());
      continue;
    }
    StratumTable sum;
    for (const StratumTable* t : members) {
      sum.p_xy += t->p_xy * t->weight;
      sum.p_xyp += t->p_xyp * t->weight;
      sum.p_xpy += t->p_xpy * t->weight;
      sum.p_xpyp += t->p_xpyp * t->weight;
      sum.weight += t->weight;
    }
    sum.p_xy /= sum.weight;
    sum.p_xyp /= sum.weight;
    sum.p_xpy /= sum.weight;
    sum.p_xpyp /= sum.weight;
    merged.emplace(key, sum);
  }
  return StratifiedJoint(keep, std::move(merged), joint.total_n());
}

ExperimentalQuantities adjusted_experimental(const StratifiedJoint& joint) {
  std::map<StratumKey, ExperimentalPair> per;
  for (const auto& [key, t] : joint.strata()) {
    per.emplace(key, ExperimentalPair{t.p_y_given_x(), t.p_y_given_xp()});
  }
  return ExperimentalQuantities(joint, std::move(per), Provenance::kSitaAdjusted);
}

CompatibleRange compatible_range(const StratumTable& t) {
  return {t.p_xy, 1.0 - t.p_xyp, t.p_xpy, 1.0 - t.p_xpyp};
}

CompatibilityReport validate_compatibility(const StratifiedJoint& joint, const ExperimentalQuantities& exp,
                                           double tol) {
  if (exp.per_stratum().size() != joint.size()) {
    throw ValidationError("experimental quantities and joint cover different strata");
  }
  CompatibilityReport report;
  for (const auto& [key, table] : joint.strata()) {
    const ExperimentalPair& e = exp.at(key);
    const CompatibleRange r = compatible_range(table);
    if (e.p_y_do_x < r.do_x_lo - tol || e.p_y_do_x > r.do_x_hi + tol) {
      report.violations.push_back({key, "x", r.do_x_lo, e.p_y_do_x, r.do_x_hi});
    }
    if (e.p_y_do_xp < r.do_xp_lo - tol || e.p_y_do_xp > r.do_xp_hi + tol) {
      report.violations.push_back({key, "x'", r.do_xp_lo, e.p_y_do_xp, r.do_xp_hi});
    }
  }
  return report;
}

}  // namespace stratcause
