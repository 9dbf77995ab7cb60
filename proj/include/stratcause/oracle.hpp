#pragma once

// Brute-force check of the closed-form boxes.
//
// Within a stratum, every unit has one of four response types
//   0 always-y, 1 y-iff-exposed, 2 y-iff-unexposed, 3 never-y
// and the type distribution may differ between the exposed and unexposed
// arms. Consistency ties each arm to the observed outcome rate, and the
// experimental probabilities fix the arm-weighted marginals. That leaves a
// polygon of admissible distributions, which we enumerate (vertices) and
// sample (grid) to find the range of PN, PS or PNS.
//
// Nothing here reuses the arithmetic in bounds.cpp.

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "stratcause/bounds.hpp"
#include "stratcause/model.hpp"

namespace stratcause::oracle {

enum ResponseType : std::size_t { kAlwaysY = 0, kYIffExposed = 1, kYIffUnexposed = 2, kNeverY = 3 };

struct ResponseTypeDist {
  std::array<double, 4> exposed{};    // P(type | x, s)
  std::array<double, 4> unexposed{};  // P(type | x', s)
  double p_x = 0.0;                   // P(x | s)
  double p_xp = 0.0;                  // P(x' | s)

  /// Arm probabilities non-negative and normalized within tol.
  bool valid(double tol = 1e-9) const;
};

struct OracleOptions {
  double resolution = 1e-3;
  /// Slack allowed on the non-negativity constraints.
  double feasibility_tol = 1e-9;
  /// Impose no-prevention: P(y-iff-unexposed | w, s) = 0 in both arms.
  bool monotone = false;
};

struct Extrema {
  Quantity quantity = Quantity::kPN;
  double lower = 0.0;  // over vertices and grid
  double upper = 0.0;
  double grid_lower = 0.0;  // grid points only
  double grid_upper = 0.0;
  std::size_t free_dimensions = 0;
  std::size_t vertex_count = 0;
  std::size_t grid_count = 0;
  ResponseTypeDist argmin;
  ResponseTypeDist argmax;
};

/// Throws IncompatibilityError when the feasible set is empty.
Extrema feasible_extrema(const StratumTable& stratum, const ExperimentalPair& exp, Quantity q,
                         const OracleOptions& opts = {});

/// All vertices of the feasible polygon (after equality elimination).
std::vector<ResponseTypeDist> feasible_vertices(const StratumTable& stratum, const ExperimentalPair& exp,
                                                const OracleOptions& opts = {});

/// Value of PN / PS / PNS at one response-type distribution of a stratum.
double evaluate(const ResponseTypeDist& dist, const StratumTable& stratum, Quantity q);

struct VerificationRow {
  StratumKey stratum;
  Quantity quantity = Quantity::kPN;
  double closed_lower = 0.0;
  double closed_upper = 0.0;
  double oracle_lower = 0.0;
  double oracle_upper = 0.0;
  double discrepancy = 0.0;  // max endpoint difference
  bool pass = false;
};

struct VerificationReport {
  std::vector<VerificationRow> rows;
  double max_discrepancy = 0.0;
  double tol = 0.0;
  bool passed() const;
  /// Rows that failed, "stratum/quantity" joined by "; ".
  std::string failures() const;
};

using ClosedForm =
    std::function<Interval(Quantity, const StratumTable&, const ExperimentalPair&, const StratumKey&)>;

/// Compare the conditional box of every stratum and quantity with the
/// oracle. `closed_form` defaults to conditional_interval.
VerificationReport verify_bounds(const StratifiedJoint& joint, const ExperimentalQuantities& exp, double tol,
                                 const OracleOptions& opts = {}, const ClosedForm& closed_form = {});

}  // namespace stratcause::oracle
