#include "stratcause/bounds.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

namespace stratcause {

namespace {

constexpr double kFeasibilityTol = 1e-9;

template <std::size_t N>
struct Box {
  std::array<double, N> lower;
  std::array<double, N> upper;
};

template <std::size_t N>
ActiveTerms select(const Box<N>& box, const StratumKey& key, double weight) {
  // first index wins ties so annotations are deterministic
  ActiveTerms t{.stratum = key, .weight = weight};
  for (std::size_t i = 1; i < N; ++i) {
    if (box.lower[i] > box.lower[t.lower_term]) t.lower_term = i;
    if (box.upper[i] < box.upper[t.upper_term]) t.upper_term = i;
  }
  t.lower = box.lower[t.lower_term];
  t.upper = box.upper[t.upper_term];
  return t;
}

void check_feasible(const ActiveTerms& t, Quantity q) {
  if (t.lower > t.upper + kFeasibilityTol) {
    std::ostringstream msg;
    msg << "stratum " << t.stratum.to_string() << ": " << to_string(q) << " bounds are infeasible (lower "
        << t.lower << " > upper " << t.upper << "); experimental and observational data violate consistency";
    throw IncompatibilityError(msg.str());
  }
}

ExperimentalPair prepare(const StratumTable& t, const ExperimentalPair& e, const BoundsOptions& opts) {
  if (!opts.clamp) return e;
  const CompatibleRange r = compatible_range(t);
  return {std::clamp(e.p_y_do_x, r.do_x_lo, r.do_x_hi), std::clamp(e.p_y_do_xp, r.do_xp_lo, r.do_xp_hi)};
}

// PN box terms; `denom` is P(x,y|s) for the conditional box and P(x,y) for
// the stratified summary, where the cap becomes P(x,y|s) / P(x,y).
Box<2> pn_box(const StratumTable& t, const ExperimentalPair& e, double denom, double cap) {
  const double p_ypxp_do = 1.0 - e.p_y_do_xp;  // P(y'_x' | s)
  return {{0.0, (p_ypxp_do - t.p_yp()) / denom}, {cap, (p_ypxp_do - t.p_xpyp) / denom}};
}

Box<4> pns_box(const StratumTable& t, const ExperimentalPair& e) {
  const double yx = e.p_y_do_x;
  const double ypxp = 1.0 - e.p_y_do_xp;
  const double effect = e.p_y_do_x - e.p_y_do_xp;
  return {{0.0, yx - t.p_y(), ypxp - t.p_yp(), effect},
          {yx, ypxp, t.p_xy + t.p_xpyp, effect + t.p_xpy + t.p_xyp}};
}

Interval from_terms(Quantity q, Method m, const ActiveTerms& t) {
  Interval iv{.quantity = q, .method = m, .lower = t.lower, .upper = t.upper};
  iv.terms.push_back(t);
  return iv;
}

Interval stratified_pn(Quantity q, const StratifiedJoint& joint, const ExperimentalQuantities& exp,
                       const BoundsOptions& opts, bool swap) {
  double p_xy = 0.0;
  for (const auto& [key, t] : joint.strata()) p_xy += (swap ? t.swapped() : t).p_xy * t.weight;

  Interval iv{.quantity = q, .method = Method::kStratified, .lower = 0.0, .upper = 0.0};
  for (const auto& [key, raw] : joint.strata()) {
    const StratumTable t = swap ? raw.swapped() : raw;
    ExperimentalPair e = prepare(raw, exp.at(key), opts);
    if (swap) e = swapped(e);
    // conditional feasibility is the per-stratum criterion
    check_feasible(select(pn_box(t, e, t.p_xy, 1.0), key, t.weight), q);
    const ActiveTerms terms = select(pn_box(t, e, p_xy, t.p_xy / p_xy), key, t.weight);
    iv.lower += terms.lower * t.weight;
    iv.upper += terms.upper * t.weight;
    iv.terms.push_back(terms);
  }
  return iv;
}

}  // namespace

std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::kPN: return "PN";
    case Quantity::kPS: return "PS";
    case Quantity::kPNS: return "PNS";
  }
  return "?";
}

Quantity parse_quantity(std::string_view text) {
  std::string upper(text);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "PN") return Quantity::kPN;
  if (upper == "PS") return Quantity::kPS;
  if (upper == "PNS") return Quantity::kPNS;
  throw ValidationError("unknown quantity '" + std::string(text) + "' (expected PN, PS or PNS)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::kTianPearl: return "tian-pearl";
    case Method::kStratified: return "stratified";
    case Method::kConditional: return "conditional";
  }
  return "?";
}

const std::vector<std::string>& term_labels(Quantity q, bool lower) {
  static const std::vector<std::string> pn_lo{"0", "P(y'_x'|s)-P(y'|s)"};
  static const std::vector<std::string> pn_hi{"P(x,y|s)", "P(y'_x'|s)-P(x',y'|s)"};
  static const std::vector<std::string> ps_lo{"0", "P(y_x|s)-P(y|s)"};
  static const std::vector<std::string> ps_hi{"P(x',y'|s)", "P(y_x|s)-P(x,y|s)"};
  static const std::vector<std::string> pns_lo{"0", "P(y_x|s)-P(y|s)", "P(y'_x'|s)-P(y'|s)", "P(y_x|s)-P(y_x'|s)"};
  static const std::vector<std::string> pns_hi{"P(y_x|s)", "P(y'_x'|s)", "P(x,y|s)+P(x',y'|s)",
                                               "P(y_x|s)-P(y_x'|s)+P(x',y|s)+P(x,y'|s)"};
  switch (q) {
    case Quantity::kPN: return lower ? pn_lo : pn_hi;
    case Quantity::kPS: return lower ? ps_lo : ps_hi;
    case Quantity::kPNS: return lower ? pns_lo : pns_hi;
  }
  return pn_lo;
}

ExperimentalPair swapped(const ExperimentalPair& exp) { return {1.0 - exp.p_y_do_xp, 1.0 - exp.p_y_do_x}; }

Interval pn_interval_conditional(const StratumTable& stratum, const ExperimentalPair& exp, const StratumKey& key,
                                 const BoundsOptions& opts) {
  const ExperimentalPair e = prepare(stratum, exp, opts);
  const ActiveTerms t = select(pn_box(stratum, e, stratum.p_xy, 1.0), key, 1.0);
  check_feasible(t, Quantity::kPN);
  Interval iv = from_terms(Quantity::kPN, Method::kConditional, t);
  iv.stratum = key;
  return iv;
}

Interval ps_interval_conditional(const StratumTable& stratum, const ExperimentalPair& exp, const StratumKey& key,
                                 const BoundsOptions& opts) {
  const ExperimentalPair e = swapped(prepare(stratum, exp, opts));
  const StratumTable t = stratum.swapped();
  const ActiveTerms terms = select(pn_box(t, e, t.p_xy, 1.0), key, 1.0);
  check_feasible(terms, Quantity::kPS);
  Interval iv = from_terms(Quantity::kPS, Method::kConditional, terms);
  iv.stratum = key;
  return iv;
}

Interval pns_interval_conditional(const StratumTable& stratum, const ExperimentalPair& exp, const StratumKey& key,
                                  const BoundsOptions& opts) {
  const ExperimentalPair e = prepare(stratum, exp, opts);
  const ActiveTerms t = select(pns_box(stratum, e), key, 1.0);
  check_feasible(t, Quantity::kPNS);
  Interval iv = from_terms(Quantity::kPNS, Method::kConditional, t);
  iv.stratum = key;
  return iv;
}

Interval conditional_interval(Quantity q, const StratumTable& stratum, const ExperimentalPair& exp,
                              const StratumKey& key, const BoundsOptions& opts) {
  switch (q) {
    case Quantity::kPN: return pn_interval_conditional(stratum, exp, key, opts);
    case Quantity::kPS: return ps_interval_conditional(stratum, exp, key, opts);
    case Quantity::kPNS: return pns_interval_conditional(stratum, exp, key, opts);
  }
  throw ValidationError("unknown quantity");
}

Interval stratified_interval(Quantity q, const StratifiedJoint& joint, const ExperimentalQuantities& exp,
                             const BoundsOptions& opts) {
  if (joint.size() == 0) throw ValidationError("stratified bounds need at least one stratum");
  if (exp.per_stratum().size() != joint.size()) {
    throw ValidationError("experimental quantities and joint cover different strata");
  }
  switch (q) {
    case Quantity::kPN: return stratified_pn(q, joint, exp, opts, false);
    case Quantity::kPS: return stratified_pn(q, joint, exp, opts, true);
    case Quantity::kPNS: break;
  }
  Interval iv{.quantity = q, .method = Method::kStratified, .lower = 0.0, .upper = 0.0};
  for (const auto& [key, t] : joint.strata()) {
    const ActiveTerms terms = select(pns_box(t, prepare(t, exp.at(key), opts)), key, t.weight);
    check_feasible(terms, q);
    iv.lower += terms.lower * t.weight;
    iv.upper += terms.upper * t.weight;
    iv.terms.push_back(terms);
  }
  return iv;
}

Interval tian_pearl_interval(Quantity q, const StratumTable& unstratified, const ExperimentalPair& marginal,
                             const BoundsOptions& opts) {
  Interval iv = conditional_interval(q, unstratified, marginal, StratumKey{}, opts);
  iv.method = Method::kTianPearl;
  iv.stratum.reset();
  return iv;
}

Interval tian_pearl_interval(Quantity q, const StratifiedJoint& joint, const ExperimentalQuantities& exp,
                             const BoundsOptions& opts) {
  const StratifiedJoint pooled = collapse(joint, {});
  return tian_pearl_interval(q, pooled.strata().begin()->second, exp.marginal(), opts);
}

}  // namespace stratcause
