#include "stratcause/cli.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "stratcause/bounds.hpp"
#include "stratcause/covselect.hpp"
#include "stratcause/identify.hpp"
#include "stratcause/io.hpp"
#include "stratcause/oracle.hpp"
#include "stratcause/report.hpp"
#include "stratcause/simulate.hpp"

namespace stratcause::cli {

using nlohmann::json;

namespace {

struct CommonOptions {
  std::string data;
  std::string experimental;
  std::string json_path;
  std::string smoothing = "none";
};

struct Loaded {
  StratifiedJoint joint;
  ExperimentalQuantities exp;
};

std::string fixed3(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << v;
  return s.str();
}

std::string interval_text(const Interval& iv) { return "[" + fixed3(iv.lower) + ", " + fixed3(iv.upper) + "]"; }

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

StratifiedJoint load_joint(const CommonOptions& o) {
  if (ends_with(o.data, ".json")) return joint_from_json(read_json_file(o.data));
  Smoothing smoothing = Smoothing::kNone;
  if (o.smoothing == "add-half") {
    smoothing = Smoothing::kAddHalf;
  } else if (o.smoothing != "none") {
    throw ValidationError("unknown smoothing '" + o.smoothing + "'");
  }
  const CountTable counts = load_counts_file(o.data);
  try {
    return to_probabilities(counts, smoothing);
  } catch (const Error& e) {
    throw ValidationError(o.data + ": " + e.what());
  }
}

Loaded load(const CommonOptions& o) {
  StratifiedJoint joint = load_joint(o);
  if (o.experimental.empty()) {
    ExperimentalQuantities exp = adjusted_experimental(joint);
    return {std::move(joint), std::move(exp)};
  }
  ExperimentalQuantities exp = experimental_from_json(read_json_file(o.experimental), joint);
  return {std::move(joint), std::move(exp)};
}

json base_report(const std::string& command) {
  return {{"tool", {{"name", "stratcause"}, {"version", kVersion}}},
          {"command", command},
          {"input", nullptr},
          {"provenance", nullptr},
          {"compatibility", nullptr},
          {"intervals", json::array()},
          {"conditional_intervals", json::array()},
          {"stratum_diagnostics", nullptr},
          {"estimates", json::array()},
          {"monotonicity", nullptr},
          {"selection", nullptr},
          {"verification", nullptr},
          {"simulation", nullptr},
          {"metadata", {{"seed", nullptr}, {"flags", json::object()}}},
          {"warnings", json::array()}};
}

json input_summary(const CommonOptions& o, const StratifiedJoint& joint) {
  json strata = json::array();
  for (const auto& [key, t] : joint.strata()) strata.push_back(key.to_string());
  return {{"file", o.data},
          {"n", joint.total_n() ? json(*joint.total_n()) : json(nullptr)},
          {"covariates", joint.covariates()},
          {"strata", std::move(strata)}};
}

void print_header(std::ostream& out, const CommonOptions& o, const Loaded& in) {
  out << "input: " << o.data << "  N=" << (in.joint.total_n() ? std::to_string(*in.joint.total_n()) : "n/a")
      << "  strata=" << in.joint.size() << '\n';
  if (in.exp.provenance() == Provenance::kSitaAdjusted) {
    out << "experimental: sita-adjusted -- no experimental data supplied, using P(y_x|s) = P(y|x,s)\n";
  } else {
    out << "experimental: measured (" << o.experimental << ")\n";
  }
}

std::vector<Quantity> quantities(const std::string& text) {
  if (text == "all" || text == "ALL") return {Quantity::kPN, Quantity::kPS, Quantity::kPNS};
  return {parse_quantity(text)};
}

void check_compatible(const Loaded& in, bool clamp, json& report, std::ostream& err) {
  const CompatibilityReport compat = validate_compatibility(in.joint, in.exp);
  report["compatibility"] = to_json(compat);
  if (compat.ok()) return;
  std::ostringstream msg;
  for (const auto& v : compat.violations) {
    msg << "stratum " << v.stratum.to_string() << ": P(y_" << v.arm << "|s)=" << v.value << " outside ["
        << v.lower << ", " << v.upper << "]";
    msg << (clamp ? " (clamped)" : "") << '\n';
  }
  if (!clamp) throw IncompatibilityError("experimental data are incompatible with the observational table:\n" + msg.str());
  err << "warning: " << msg.str();
  report["warnings"].push_back("experimental quantities were clamped into the compatible range");
}

int cmd_bounds(const CommonOptions& o, const std::string& quantity_text, bool clamp, std::ostream& out,
               std::ostream& err, json& report) {
  const Loaded in = load(o);
  report["input"] = input_summary(o, in.joint);
  report["provenance"] = to_string(in.exp.provenance());
  report["metadata"]["flags"] = {{"quantity", quantity_text}, {"clamp", clamp}, {"smoothing", o.smoothing},
                                 {"experimental", o.experimental.empty() ? json(nullptr) : json(o.experimental)}};
  check_compatible(in, clamp, report, err);
  const BoundsOptions opts{.clamp = clamp};

  print_header(out, o, in);
  for (Quantity q : quantities(quantity_text)) {
    const Interval strat = stratified_interval(q, in.joint, in.exp, opts);
    const Interval tp = tian_pearl_interval(q, in.joint, in.exp, opts);
    report["intervals"].push_back(to_json(strat));
    report["intervals"].push_back(to_json(tp));
    out << '\n' << std::left << std::setw(4) << to_string(q) << "stratified  " << interval_text(strat) << '\n';
    out << std::setw(4) << "" << "tian-pearl  " << interval_text(tp) << '\n';
    const auto& lo = term_labels(q, true);
    const auto& hi = term_labels(q, false);
    for (const auto& t : strat.terms) {
      const Interval box = conditional_interval(q, in.joint.at(t.stratum), in.exp.at(t.stratum), t.stratum, opts);
      report["conditional_intervals"].push_back(to_json(box));
      out << "    " << std::setw(20) << t.stratum.to_string() << " box " << interval_text(box) << "  max: " << lo[t.lower_term]
          << "  min: " << hi[t.upper_term] << '\n';
    }
    out << "    " << std::setw(20) << "(pooled)" << "     " << "            " << "  max: " << lo[tp.terms[0].lower_term]
        << "  min: " << hi[tp.terms[0].upper_term] << '\n';
  }

  json diag = json::array();
  out << "\nstratum diagnostics  P(y_x|s)-P(y_x'|s)  P(y_x|s)-P(y'_x'|s)\n";
  for (const auto& [key, t] : in.joint.strata()) {
    const ExperimentalPair& e = in.exp.at(key);
    const double rd = e.p_y_do_x - e.p_y_do_xp;
    const double cross = e.p_y_do_x - (1.0 - e.p_y_do_xp);
    diag.push_back({{"stratum", to_json(key)}, {"risk_difference", rd}, {"do_x_minus_no_event_do_xprime", cross}});
    out << "    " << std::setw(20) << key.to_string() << std::right << std::setw(10) << fixed3(rd) << std::setw(22)
        << fixed3(cross) << std::left << '\n';
  }
  report["stratum_diagnostics"] = std::move(diag);
  return kOk;
}

int cmd_identify(const CommonOptions& o, const std::string& stratifier_text, std::int64_t n_override,
                 std::ostream& out, json& report) {
  const StratifiedJoint full = load_joint(o);
  const StratifiedJoint joint =
      stratifier_text.empty() ? full : collapse(full, parse_stratifier(stratifier_text));
  report["input"] = input_summary(o, full);
  report["provenance"] = to_string(Provenance::kSitaAdjusted);
  report["metadata"]["flags"] = {{"stratifier", stratifier_name(joint.covariates())},
                                 {"n", n_override > 0 ? json(n_override) : json(nullptr)},
                                 {"smoothing", o.smoothing}};
  PointOptions opts{.require_variance = false};
  if (n_override > 0) opts.n = n_override;

  out << "input: " << o.data << "  stratifier: "
      << (joint.covariates().empty() ? std::string("(none)") : stratifier_name(joint.covariates())) << '\n';
  for (const Estimate& est : {pn_point(joint, opts), pns_point(joint, opts)}) {
    report["estimates"].push_back(to_json(est));
    out << std::left << std::setw(4) << to_string(est.quantity) << " value " << fixed3(est.value);
    if (est.avar) {
      out << "  a.var " << std::setprecision(6) << *est.avar << "  se " << fixed3(*est.se()) << "  N=" << *est.n;
    } else {
      out << "  a.var n/a (sample size unknown)";
    }
    out << '\n';
    for (const auto& w : est.warnings) {
      out << "  warning: " << w << '\n';
      report["warnings"].push_back(w);
    }
  }
  const MonotonicityReport mono = monotonicity_diagnostic(joint, adjusted_experimental(joint));
  report["monotonicity"] = to_json(mono);
  out << "monotonicity check (negative risk difference contradicts no-prevention):\n";
  for (const auto& row : mono.strata) {
    out << "    " << std::setw(20) << row.stratum.to_string() << std::right << std::setw(8)
        << fixed3(row.risk_difference) << std::left << (row.flagged ? "  FLAGGED" : "") << '\n';
  }
  return kOk;
}

int cmd_select(const CommonOptions& o, const std::string& s, const std::string& t, const std::string& mode,
               double tol, double alpha, std::ostream& out, json& report) {
  const StratifiedJoint joint = load_joint(o);
  report["input"] = input_summary(o, joint);
  report["provenance"] = to_string(Provenance::kSitaAdjusted);
  SelectionOptions opts;
  if (mode == "count") {
    opts.ci.mode = CIMode::kCountTest;
  } else if (mode != "exact") {
    throw ValidationError("unknown ci mode '" + mode + "' (expected exact or count)");
  }
  opts.ci.tol = tol;
  opts.ci.alpha = alpha;
  report["metadata"]["flags"] = {{"s", s}, {"t", t}, {"ci_mode", mode}, {"tol", tol}, {"alpha", alpha}};
  const SelectionReport sel = compare_covariate_sets(joint, s, t, opts);
  report["selection"] = to_json(sel);
  for (const auto& c : sel.candidates) {
    report["estimates"].push_back(to_json(c.pn));
    report["estimates"].push_back(to_json(c.pns));
  }

  out << std::left << std::setw(10) << "stratifier" << std::right << std::setw(10) << "PN" << std::setw(12) << "a.var"
      << std::setw(10) << "PNS" << std::setw(12) << "a.var" << '\n';
  for (const auto& c : sel.candidates) {
    out << std::left << std::setw(10) << stratifier_name(c.stratifier) << std::right << std::setw(10)
        << fixed3(c.pn.value) << std::setw(12) << std::setprecision(6) << *c.pn.avar << std::setw(10)
        << fixed3(c.pns.value) << std::setw(12) << std::setprecision(6) << *c.pns.avar << '\n';
  }
  for (const auto& v : sel.ci_results) {
    out << v.relation.to_string() << ": " << (v.holds ? "holds" : "rejected");
    if (v.mode == CIMode::kCountTest) {
      out << " (G=" << std::setprecision(4) << v.statistic << ", df=" << v.dof << ", p=" << v.p_value << ")";
    } else {
      out << " (max deviation " << std::setprecision(4) << v.max_deviation << ")";
    }
    out << '\n';
  }
  for (const auto& ord : sel.orderings) {
    out << to_string(ord.quantity) << ": a.var " << stratifier_name(ord.smaller) << " <= " << stratifier_name(ord.larger)
        << "  " << (ord.satisfied ? "yes" : "no") << "  [" << ord.note << "]\n";
  }
  if (sel.recommendation.empty()) {
    out << "recommendation: none (premises not both satisfied)\n";
  } else {
    for (const auto& [q, strat] : sel.recommendation) {
      out << "recommendation (" << to_string(q) << "): " << stratifier_name(strat) << '\n';
    }
  }
  return kOk;
}

int cmd_simulate(int setting, const std::string& scenario_path, const StudyOptions& opts, std::ostream& out,
                 json& report) {
  const Scenario scenario =
      scenario_path.empty() ? builtin_scenario(setting) : scenario_from_json(read_json_file(scenario_path));
  report["metadata"]["seed"] = opts.seed;
  report["metadata"]["flags"] = {{"setting", scenario_path.empty() ? json(setting) : json(nullptr)},
                                 {"scenario", scenario_path.empty() ? json(nullptr) : json(scenario_path)},
                                 {"n", opts.n},
                                 {"reps", opts.reps}};
  const StudyResult study = replicate_study(scenario, opts);
  json sim = to_json(study);
  sim["scenario_spec"] = to_json(scenario);
  report["simulation"] = std::move(sim);

  out << study.scenario << "  N=" << opts.n << "  reps=" << opts.reps << "  seed=" << opts.seed
      << "  discarded=" << study.discarded << '\n';
  out << std::left << std::setw(6) << "" << std::setw(8) << "" << std::right << std::setw(10) << "var" << std::setw(10)
      << "a.var" << std::setw(8) << "ratio" << std::setw(12) << "mean est" << '\n';
  for (const auto& r : study.results) {
    out << std::left << std::setw(6) << to_string(r.quantity) << std::setw(8) << stratifier_name(r.stratifier)
        << std::right << std::fixed << std::setprecision(4) << std::setw(10) << r.empirical_var << std::setw(10)
        << r.population_avar << std::setprecision(3) << std::setw(8) << r.empirical_var / r.population_avar
        << std::setw(12) << r.mean_estimate << '\n';
    out.unsetf(std::ios::fixed);
  }
  return kOk;
}

int cmd_verify(const CommonOptions& o, double resolution, double tol, std::ostream& out, json& report) {
  const Loaded in = load(o);
  report["input"] = input_summary(o, in.joint);
  report["provenance"] = to_string(in.exp.provenance());
  report["metadata"]["flags"] = {{"resolution", resolution}, {"tol", tol}};
  const oracle::OracleOptions opts{.resolution = resolution};
  const auto verification = oracle::verify_bounds(in.joint, in.exp, tol, opts);
  report["verification"] = to_json(verification);

  print_header(out, o, in);
  for (const auto& r : verification.rows) {
    out << "  " << std::left << std::setw(20) << r.stratum.to_string() << std::setw(4) << to_string(r.quantity)
        << " closed [" << fixed3(r.closed_lower) << ", " << fixed3(r.closed_upper) << "]  oracle ["
        << fixed3(r.oracle_lower) << ", " << fixed3(r.oracle_upper) << "]  " << (r.pass ? "ok" : "MISMATCH") << '\n';
  }
  out << "max discrepancy " << std::scientific << std::setprecision(2) << verification.max_discrepancy << " (tol "
      << tol << "): " << (verification.passed() ? "PASS" : "FAIL") << '\n';
  out.unsetf(std::ios::scientific);
  return verification.passed() ? kOk : kDataError;
}

void write_report(const std::string& path, const json& report) {
  if (path.empty()) return;
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write report to " + path);
  f << report.dump(2) << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bounds and point estimates for the probabilities of causation from stratified data", "stratcause"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonOptions common;
  auto add_data = [&](CLI::App* sub, bool experimental) {
    sub->add_option("--data", common.data, "count CSV (or joint JSON)")->required();
    if (experimental) sub->add_option("--experimental", common.experimental, "per-stratum P(y_x|s), P(y_x'|s) JSON");
    sub->add_option("--smoothing", common.smoothing, "zero-cell handling: none | add-half")
        ->check(CLI::IsMember({"none", "add-half"}));
    sub->add_option("--json", common.json_path, "write the full report to this path");
  };

  auto* bounds = app.add_subcommand("bounds", "stratified and unstratified bounds on PN / PS / PNS");
  add_data(bounds, true);
  std::string quantity = "all";
  bool clamp = false;
  bounds->add_option("--quantity", quantity, "PN | PS | PNS | all");
  bounds->add_flag("--clamp", clamp, "pull incompatible experimental inputs into the feasible range");

  auto* identify = app.add_subcommand("identify", "point estimates under no-prevention with asymptotic variances");
  add_data(identify, false);
  std::string stratifier;
  std::int64_t n_override = 0;
  identify->add_option("--stratifier", stratifier, "comma-separated covariates (default: all)");
  identify->add_option("--n", n_override, "sample size for the variance (default: from the data)");

  auto* select = app.add_subcommand("select", "compare stratifiers S, T and {S,T}");
  add_data(select, false);
  std::string s_name, t_name, ci_mode = "exact";
  double ci_tol = 0.02, alpha = 0.05;
  select->add_option("--s", s_name, "covariate in the S role")->required();
  select->add_option("--t", t_name, "covariate in the T role")->required();
  select->add_option("--ci-mode", ci_mode, "exact | count")->check(CLI::IsMember({"exact", "count"}));
  select->add_option("--tol", ci_tol, "exact-mode tolerance");
  select->add_option("--alpha", alpha, "count-test significance level");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo study of the estimator variances");
  int setting = 0;
  std::string scenario_path;
  StudyOptions study;
  auto* setting_opt = simulate->add_option("--setting", setting, "built-in setting 1..4")->check(CLI::Range(1, 4));
  auto* scenario_opt = simulate->add_option("--scenario", scenario_path, "scenario JSON");
  setting_opt->excludes(scenario_opt);
  simulate->add_option("--n", study.n, "sample size per replication")->check(CLI::PositiveNumber);
  simulate->add_option("--reps", study.reps, "number of replications")->check(CLI::Range(2, 100000000));
  simulate->add_option("--seed", study.seed, "random seed");
  simulate->add_option("--threads", study.threads, "worker threads (0 = all cores)");
  simulate->add_option("--json", common.json_path, "write the full report to this path");

  auto* verify = app.add_subcommand("verify", "cross-check the closed-form boxes against the response-type polytope");
  add_data(verify, true);
  double resolution = 1e-3, verify_tol = 2e-3;
  verify->add_option("--resolution", resolution, "grid resolution in (0, 0.1]");
  verify->add_option("--tol", verify_tol, "allowed endpoint discrepancy");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (simulate->parsed() && !setting_opt->count() && !scenario_opt->count()) {
      throw CLI::RequiredError("--setting or --scenario");
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  json report;
  try {
    int status = kOk;
    if (bounds->parsed()) {
      report = base_report("bounds");
      status = cmd_bounds(common, quantity, clamp, out, err, report);
    } else if (identify->parsed()) {
      report = base_report("identify");
      status = cmd_identify(common, stratifier, n_override, out, report);
    } else if (select->parsed()) {
      report = base_report("select");
      status = cmd_select(common, s_name, t_name, ci_mode, ci_tol, alpha, out, report);
    } else if (simulate->parsed()) {
      report = base_report("simulate");
      status = cmd_simulate(setting, scenario_path, study, out, report);
    } else if (verify->parsed()) {
      report = base_report("verify");
      status = cmd_verify(common, resolution, verify_tol, out, report);
    }
    write_report(common.json_path, report);
    return status;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace stratcause::cli
