#include "stratcause/identify.hpp"

#include <algorithm>
#include <cmath>

namespace stratcause {

namespace {

constexpr double kInsideTol = 1e-9;

std::optional<std::int64_t> sample_size(const StratifiedJoint& joint, const PointOptions& opts) {
  std::optional<std::int64_t> n = opts.n ? opts.n : joint.total_n();
  if (n && *n <= 0) throw ValidationError("sample size must be positive");
  if (!n && opts.require_variance) {
    throw ValidationError("asymptotic variance requested but the sample size N is unknown");
  }
  return n;
}

void warn_if_outside(Estimate& est) {
  if (est.value < 0.0 || est.value > 1.0) {
    est.warnings.push_back(to_string(est.quantity) + " estimate " + std::to_string(est.value) +
                           " lies outside [0, 1]; the data contradict the monotonicity (no-prevention) assumption");
  }
}

// Binomial variance of the plug-in P(y|arm, s): p(1-p) / (N P(arm, s)).
double arm_term(double p_y, double n, double p_arm_s) { return (1.0 - p_y) * p_y / (n * p_arm_s); }

}  // namespace

std::optional<double> Estimate::se() const {
  if (!avar) return std::nullopt;
  return std::sqrt(*avar);
}

Estimate pn_point(const StratifiedJoint& joint, const PointOptions& opts) {
  const auto n = sample_size(joint, opts);
  Estimate est{.quantity = Quantity::kPN, .n = n, .covariates = joint.covariates()};

  double p_xy = 0.0;
  for (const auto& [key, t] : joint.strata()) p_xy += t.p_xy * t.weight;
  if (!(p_xy > 0.0)) throw ValidationError("P(x, y) must be positive to identify PN");

  for (const auto& [key, t] : joint.strata()) {
    est.value += (t.p_yp_given_xp() - t.p_yp()) * t.weight / p_xy;
  }
  if (n) {
    const double dn = static_cast<double>(*n);
    const double shrink = (1.0 - est.value) * (1.0 - est.value);
    double avar = 0.0;
    for (const auto& [key, t] : joint.strata()) {
      const double p_x_s = t.p_x() * t.weight;
      const double p_xp_s = t.p_xp() * t.weight;
      const double ratio = p_x_s / p_xy;
      avar += (shrink * arm_term(t.p_y_given_x(), dn, p_x_s) + arm_term(t.p_y_given_xp(), dn, p_xp_s)) * ratio *
              ratio;
    }
    est.avar = avar;
  }
  warn_if_outside(est);
  return est;
}

Estimate pns_point(const StratifiedJoint& joint, const PointOptions& opts) {
  const auto n = sample_size(joint, opts);
  Estimate est{.quantity = Quantity::kPNS, .n = n, .covariates = joint.covariates()};
  for (const auto& [key, t] : joint.strata()) {
    est.value += (t.p_y_given_x() - t.p_y_given_xp()) * t.weight;
  }
  if (n) {
    const double dn = static_cast<double>(*n);
    double avar = 0.0;
    for (const auto& [key, t] : joint.strata()) {
      avar += (arm_term(t.p_y_given_x(), dn, t.p_x() * t.weight) +
               arm_term(t.p_y_given_xp(), dn, t.p_xp() * t.weight)) *
              t.weight * t.weight;
    }
    est.avar = avar;
  }
  warn_if_outside(est);
  return est;
}

bool MonotonicityReport::any_flagged() const {
  return std::any_of(strata.begin(), strata.end(), [](const MonotonicityRow& r) { return r.flagged; });
}

MonotonicityReport monotonicity_diagnostic(const StratifiedJoint& joint, const ExperimentalQuantities& exp) {
  MonotonicityReport report;
  double p_xy = 0.0;
  for (const auto& [key, t] : joint.strata()) p_xy += t.p_xy * t.weight;
  for (const auto& [key, t] : joint.strata()) {
    const ExperimentalPair& e = exp.at(key);
    const double rd = e.p_y_do_x - e.p_y_do_xp;
    report.strata.push_back({key, rd, rd < 0.0});
    report.pn_value += ((1.0 - e.p_y_do_xp) - t.p_yp()) * t.weight / p_xy;
    report.pns_value += rd * t.weight;
  }
  report.pn_interval = stratified_interval(Quantity::kPN, joint, exp);
  report.pns_interval = stratified_interval(Quantity::kPNS, joint, exp);
  auto inside = [](double v, const Interval& iv) {
    return v >= iv.lower - kInsideTol && v <= iv.upper + kInsideTol;
  };
  report.pn_inside = inside(report.pn_value, report.pn_interval);
  report.pns_inside = inside(report.pns_value, report.pns_interval);
  return report;
}

}  // namespace stratcause
