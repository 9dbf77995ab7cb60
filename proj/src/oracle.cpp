#include "stratcause/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace stratcause::oracle {

namespace {

constexpr std::size_t kVars = 8;  // 4 types x 2 arms; unexposed arm at offset 4
constexpr double kPivotTol = 1e-13;

using Row = std::array<double, kVars + 1>;  // coefficients | rhs

// v = offset + sum_f direction[f] * z_f, one entry per variable.
struct Parameterization {
  std::array<double, kVars> offset{};
  std::vector<std::array<double, kVars>> directions;  // one per free variable
};

std::vector<Row> equality_system(const StratumTable& t, const ExperimentalPair& exp, bool monotone) {
  const double w_x = t.p_xy + t.p_xyp;
  const double w_xp = t.p_xpy + t.p_xpyp;
  std::vector<Row> rows;
  rows.push_back({1, 1, 1, 1, 0, 0, 0, 0, 1.0});
  rows.push_back({0, 0, 0, 0, 1, 1, 1, 1, 1.0});
  // consistency: the exposed arm shows Y_x, the unexposed arm shows Y_x'
  rows.push_back({1, 1, 0, 0, 0, 0, 0, 0, t.p_xy / w_x});
  rows.push_back({0, 0, 0, 0, 1, 0, 1, 0, t.p_xpy / w_xp});
  // experimental marginals, arm-weighted
  rows.push_back({w_x, w_x, 0, 0, w_xp, w_xp, 0, 0, exp.p_y_do_x});
  rows.push_back({w_x, 0, w_x, 0, w_xp, 0, w_xp, 0, exp.p_y_do_xp});
  if (monotone) {
    rows.push_back({0, 0, 1, 0, 0, 0, 0, 0, 0.0});
    rows.push_back({0, 0, 0, 0, 0, 0, 1, 0, 0.0});
  }
  return rows;
}

// Reduced row echelon form; returns nullopt if the system is inconsistent.
std::optional<Parameterization> solve_equalities(std::vector<Row> rows) {
  std::vector<std::size_t> pivot_cols;
  std::size_t r = 0;
  for (std::size_t c = 0; c < kVars && r < rows.size(); ++c) {
    std::size_t best = r;
    for (std::size_t i = r + 1; i < rows.size(); ++i) {
      if (std::abs(rows[i][c]) > std::abs(rows[best][c])) best = i;
    }
    if (std::abs(rows[best][c]) < kPivotTol) continue;
    std::swap(rows[r], rows[best]);
    const double pivot = rows[r][c];
    for (double& v : rows[r]) v /= pivot;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][c] == 0.0) continue;
      const double factor = rows[i][c];
      for (std::size_t k = 0; k <= kVars; ++k) rows[i][k] -= factor * rows[r][k];
    }
    pivot_cols.push_back(c);
    ++r;
  }
  for (std::size_t i = r; i < rows.size(); ++i) {
    if (std::abs(rows[i][kVars]) > 1e-12) return std::nullopt;
  }

  std::vector<std::size_t> free_cols;
  for (std::size_t c = 0; c < kVars; ++c) {
    if (std::find(pivot_cols.begin(), pivot_cols.end(), c) == pivot_cols.end()) free_cols.push_back(c);
  }
  Parameterization p;
  p.directions.assign(free_cols.size(), {});
  for (std::size_t f = 0; f < free_cols.size(); ++f) p.directions[f][free_cols[f]] = 1.0;
  for (std::size_t i = 0; i < pivot_cols.size(); ++i) {
    const std::size_t c = pivot_cols[i];
    p.offset[c] = rows[i][kVars];
    for (std::size_t f = 0; f < free_cols.size(); ++f) p.directions[f][c] = -rows[i][free_cols[f]];
  }
  return p;
}

std::array<double, kVars> point(const Parameterization& p, const std::vector<double>& z) {
  std::array<double, kVars> v = p.offset;
  for (std::size_t f = 0; f < z.size(); ++f) {
    for (std::size_t i = 0; i < kVars; ++i) v[i] += p.directions[f][i] * z[f];
  }
  return v;
}

bool feasible(const std::array<double, kVars>& v, double tol) {
  return std::all_of(v.begin(), v.end(), [tol](double x) { return x >= -tol; });
}

// Vertices of {z : offset + D z >= 0}: points where `dim` constraints are tight.
std::vector<std::vector<double>> vertices(const Parameterization& p, double tol) {
  const std::size_t dim = p.directions.size();
  std::vector<std::vector<double>> out;
  auto add = [&](std::vector<double> z) {
    if (!feasible(point(p, z), tol)) return;
    for (const auto& existing : out) {
      double dist = 0.0;
      for (std::size_t f = 0; f < dim; ++f) dist = std::max(dist, std::abs(existing[f] - z[f]));
      if (dist < 1e-12) return;
    }
    out.push_back(std::move(z));
  };
  auto coeff = [&](std::size_t i, std::size_t f) { return p.directions[f][i]; };

  if (dim == 0) {
    add({});
  } else if (dim == 1) {
    for (std::size_t i = 0; i < kVars; ++i) {
      if (std::abs(coeff(i, 0)) < kPivotTol) continue;
      add({-p.offset[i] / coeff(i, 0)});
    }
  } else if (dim == 2) {
    for (std::size_t i = 0; i < kVars; ++i) {
      for (std::size_t j = i + 1; j < kVars; ++j) {
        const double a = coeff(i, 0), b = coeff(i, 1), c = coeff(j, 0), d = coeff(j, 1);
        const double det = a * d - b * c;
        if (std::abs(det) < kPivotTol) continue;
        const double ri = -p.offset[i], rj = -p.offset[j];
        add({(ri * d - b * rj) / det, (a * rj - c * ri) / det});
      }
    }
  } else {
    throw ValidationError("response-type polytope has unexpected dimension " + std::to_string(dim));
  }
  return out;
}

ResponseTypeDist to_dist(const std::array<double, kVars>& v, const StratumTable& t) {
  ResponseTypeDist d;
  std::copy(v.begin(), v.begin() + 4, d.exposed.begin());
  std::copy(v.begin() + 4, v.end(), d.unexposed.begin());
  d.p_x = t.p_xy + t.p_xyp;
  d.p_xp = t.p_xpy + t.p_xpyp;
  return d;
}

std::vector<double> grid_axis(double lo, double hi, double step) {
  std::vector<double> axis;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step));
  for (std::size_t i = 0; i <= n; ++i) axis.push_back(lo + static_cast<double>(i) * step);
  if (axis.empty() || axis.back() < hi) axis.push_back(hi);
  return axis;
}

Parameterization parameterize(const StratumTable& stratum, const ExperimentalPair& exp, const OracleOptions& opts) {
  auto p = solve_equalities(equality_system(stratum, exp, opts.monotone));
  if (!p) throw IncompatibilityError("response-type constraints are inconsistent");
  return *p;
}

}  // namespace

bool ResponseTypeDist::valid(double tol) const {
  auto arm_ok = [tol](const std::array<double, 4>& a) {
    double sum = 0.0;
    for (double v : a) {
      if (v < -tol) return false;
      sum += v;
    }
    return std::abs(sum - 1.0) <= tol;
  };
  return arm_ok(exposed) && arm_ok(unexposed);
}

double evaluate(const ResponseTypeDist& d, const StratumTable& t, Quantity q) {
  switch (q) {
    case Quantity::kPN:
      // P(y-iff-exposed | x, s) / P(y | x, s)
      return d.exposed[kYIffExposed] * (t.p_xy + t.p_xyp) / t.p_xy;
    case Quantity::kPS:
      // P(y-iff-exposed | x', s) / P(y' | x', s)
      return d.unexposed[kYIffExposed] * (t.p_xpy + t.p_xpyp) / t.p_xpyp;
    case Quantity::kPNS:
      return d.p_x * d.exposed[kYIffExposed] + d.p_xp * d.unexposed[kYIffExposed];
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<ResponseTypeDist> feasible_vertices(const StratumTable& stratum, const ExperimentalPair& exp,
                                                const OracleOptions& opts) {
  const Parameterization p = parameterize(stratum, exp, opts);
  std::vector<ResponseTypeDist> out;
  for (const auto& z : vertices(p, opts.feasibility_tol)) out.push_back(to_dist(point(p, z), stratum));
  return out;
}

Extrema feasible_extrema(const StratumTable& stratum, const ExperimentalPair& exp, Quantity q,
                         const OracleOptions& opts) {
  if (!(opts.resolution > 0.0 && opts.resolution <= 0.1)) {
    throw ValidationError("oracle resolution must lie in (0, 0.1]");
  }
  const Parameterization p = parameterize(stratum, exp, opts);
  const auto verts = vertices(p, opts.feasibility_tol);
  if (verts.empty()) throw IncompatibilityError("no response-type distribution reproduces the data");

  constexpr double inf = std::numeric_limits<double>::infinity();
  Extrema ex{.quantity = q, .lower = inf, .upper = -inf, .grid_lower = inf, .grid_upper = -inf};
  ex.free_dimensions = p.directions.size();
  ex.vertex_count = verts.size();

  auto consider = [&](const std::vector<double>& z, bool grid) {
    const auto v = point(p, z);
    if (!feasible(v, opts.feasibility_tol)) return false;
    const ResponseTypeDist d = to_dist(v, stratum);
    const double value = evaluate(d, stratum, q);
    if (value < ex.lower) {
      ex.lower = value;
      ex.argmin = d;
    }
    if (value > ex.upper) {
      ex.upper = value;
      ex.argmax = d;
    }
    if (grid) {
      ex.grid_lower = std::min(ex.grid_lower, value);
      ex.grid_upper = std::max(ex.grid_upper, value);
    }
    return true;
  };

  for (const auto& z : verts) consider(z, false);

  const std::size_t dim = p.directions.size();
  std::vector<double> lo(dim, inf), hi(dim, -inf);
  for (const auto& z : verts) {
    for (std::size_t f = 0; f < dim; ++f) {
      lo[f] = std::min(lo[f], z[f]);
      hi[f] = std::max(hi[f], z[f]);
    }
  }
  if (dim == 0) {
    ex.grid_count += consider({}, true);
  } else if (dim == 1) {
    for (double u : grid_axis(lo[0], hi[0], opts.resolution)) ex.grid_count += consider({u}, true);
  } else {
    const auto vs = grid_axis(lo[1], hi[1], opts.resolution);
    for (double u : grid_axis(lo[0], hi[0], opts.resolution)) {
      for (double v : vs) ex.grid_count += consider({u, v}, true);
    }
  }
  return ex;
}

bool VerificationReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const VerificationRow& r) { return r.pass; });
}

std::string VerificationReport::failures() const {
  std::string out;
  for (const auto& r : rows) {
    if (r.pass) continue;
    if (!out.empty()) out += "; ";
    out += r.stratum.to_string() + "/" + to_string(r.quantity);
  }
  return out;
}

VerificationReport verify_bounds(const StratifiedJoint& joint, const ExperimentalQuantities& exp, double tol,
                                 const OracleOptions& opts, const ClosedForm& closed_form) {
  VerificationReport report;
  report.tol = tol;
  for (const auto& [key, table] : joint.strata()) {
    const ExperimentalPair& e = exp.at(key);
    for (Quantity q : {Quantity::kPN, Quantity::kPS, Quantity::kPNS}) {
      const Interval closed = closed_form ? closed_form(q, table, e, key) : conditional_interval(q, table, e, key);
      const Extrema ex = feasible_extrema(table, e, q, opts);
      VerificationRow row{.stratum = key,
                          .quantity = q,
                          .closed_lower = closed.lower,
                          .closed_upper = closed.upper,
                          .oracle_lower = ex.lower,
                          .oracle_upper = ex.upper};
      row.discrepancy = std::max(std::abs(closed.lower - ex.lower), std::abs(closed.upper - ex.upper));
      row.pass = row.discrepancy <= tol;
      report.max_discrepancy = std::max(report.max_discrepancy, row.discrepancy);
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace stratcause::oracle
