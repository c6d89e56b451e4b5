// vstates -- verification audits.
//
// Each check compares computed quantities against independently known facts:
// the linearization against its closed-form diagonal, the branch start against
// the local bifurcation curve, boundary derivatives against small-amplitude
// expansions, geometry against classical function-theoretic bounds, nodal sign
// patterns along the boundary, and the trace derivative against its
// phase-only reconstruction.

#pragma once

#include <string>
#include <vector>

#include "vstates/boundary.hpp"
#include "vstates/continuation.hpp"
#include "vstates/spectral.hpp"

namespace vstates {

struct AuditEntry {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditEntry> entries;
  bool all_pass() const;
  void add(const AuditEntry& e);
  void merge(const AuditReport& other);
};

/// Dense finite-difference Jacobian at a = 0 (small M) against the diagonal
/// multiplier k m (Omega - Omega_{km}): relative diagonal error and absolute
/// off-diagonal magnitude both <= 1e-6, and entry k vanishes at
/// Omega = Omega_{km}.
AuditReport check_linearization(int m, double omega, int modes, int N);

/// Near-start records against the local bifurcation curve: quadratic fit of
/// Omega vs a_1 has |linear term| <= 5% of the quadratic term at the largest
/// amplitude, and log-log slope of a_2 vs a_1 is >= 1.8.
AuditReport check_local_curve(const std::vector<SolutionRecord>& records,
                              int m);

/// Single-mode traces at small amplitudes against the boundary-derivative
/// expansions (leading polar coefficients and the order of the remainders).
AuditReport check_expansions_psi(int m, int modes, int N);

/// Geometry bounds on one record: 1 < max|phi| <= 4 (+1e-9 slack), the
/// weighted integral bound on |phi'|^p at p driven by the distortion angle,
/// 0 < Omega < 1/2, and min boundary dPsi/dr > 0.
AuditReport check_bounds(const GridTrace& trace, double omega);

/// Nodal sign pattern along the boundary in the closed sector [0, pi/m]:
/// R'(theta) < 0 strictly between the rays, dPsi/dr > 0 everywhere,
/// dPsi/dtheta > 0 strictly inside, and the four second-order inequalities
/// (mixed derivative negative inside, third-order ray conditions at both
/// endpoints, and the (r d/dr)^2 gap bound).
AuditReport check_nodal(const GridTrace& trace, double omega);

/// Sup-norm defect of the phase-only reconstruction of phi' (<= 1e-6 on a
/// converged record).
AuditReport check_rh_identity(const GridTrace& trace, double omega);

/// Run the record-wise audits over a whole branch plus the branch-level local
/// curve check; `every` subsamples record-wise audits (1 = all records).
AuditReport run_audit(const std::vector<SolutionRecord>& records,
                      const BranchConfig& config, int every = 1);

}  // namespace vstates
