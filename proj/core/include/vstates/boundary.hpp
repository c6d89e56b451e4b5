// vstates -- boundary integral operators on a sampled trace.
//
// The workhorse is the Cauchy-type operator
//
//   C(phi) g (w) = (1/2 pi i) \oint_T [g(tau) - g(w)] / [phi(tau) - phi(w)]
//                               phi'(tau) dtau,
//
// discretized by the N-point trapezoid rule with the tau = w term replaced by
// its analytic limit. Everything else here -- the rotation residual, the
// boundary coefficient A, the stream-function derivatives on the boundary,
// polar quantities, health metrics, and the phase reconstruction -- is built
// on that discretization.

#pragma once

#include <complex>
#include <vector>

#include "vstates/spectral.hpp"

namespace vstates {

using cvec = std::vector<std::complex<double>>;
using rvec = std::vector<double>;

/// C(phi) g at every grid node for arbitrary samples g; the diagonal limit is
/// the tangential derivative of g, computed spectrally. Deterministic: fixed
/// ascending summation order with compensated (Neumaier) accumulation.
cvec cauchy_apply(const GridTrace& trace, const cvec& g);

/// C(phi) conj(phi) with the closed-form diagonal limit -conj(phi'(w)) wbar^2;
/// this is the special case appearing in the rotation residual.
cvec cauchy_conj_phi(const GridTrace& trace);

/// Rotation residual sampled at the grid nodes:
///   F(w) = Im{ (Omega conj(phi) + (1/2) C(phi) conj(phi)) w phi'(w) },
/// i.e. the tangential derivative of the relative stream function along the
/// boundary; it vanishes exactly on a uniformly rotating patch.
rvec residual(const GridTrace& trace, double omega);

/// Boundary coefficient A = (Omega conj(phi) + (1/2) C(phi) conj(phi)) w.
/// |A| equals twice the boundary speed |dzPsi o phi|; its winding number
/// vanishes on healthy solutions.
cvec coefficient_A(const GridTrace& trace, double omega);

/// First, second and third complex derivatives of the (relative) stream
/// function composed with the trace, plus the polar derivative combinations
/// used by the nodal audits. The second/third derivatives are the exterior
/// (vorticity-free side) limits.
struct BoundaryDerivs {
  cvec dzPsi;    ///< dPsi/dz o phi (continuous across the boundary)
  cvec dz2Psi;   ///< d^2Psi/dz^2 o phi, exterior limit
  cvec dz3Psi;   ///< d^3Psi/dz^3 o phi, exterior limit
  rvec dthPsi;        ///< dPsi/dtheta
  rvec rdrPsi;        ///< r dPsi/dr
  rvec dth_rdrPsi;    ///< d/dtheta (r dPsi/dr)
  rvec rdr2Psi;       ///< (r d/dr)^2 Psi, exterior limit
  rvec dth2Psi;       ///< d^2Psi/dtheta^2, exterior limit
  rvec dth2_rdrPsi;   ///< d^2/dtheta^2 (r dPsi/dr), exterior limit
};

BoundaryDerivs stream_derivs_boundary(const GridTrace& trace, double omega);

/// Polar description of the boundary: rho = |phi|, unwrapped polar angle
/// theta with theta(t=0) = 0, their t-derivatives, and the unwrapped conformal
/// distortion angle gamma = arg(w phi'/phi) with gamma(t=0) = 0.
struct PolarQuantities {
  rvec rho;     ///< |phi|
  rvec theta;   ///< unwrapped arg phi
  rvec drho;    ///< d rho / dt = -rho Im(w phi'/phi)
  rvec dtheta;  ///< d theta / dt = Re(w phi'/phi)
  rvec gamma;   ///< unwrapped arg(w phi'/phi)
};

PolarQuantities polar_quantities(const GridTrace& trace);

/// Winding number of a closed nodal sequence of nonzero complex values,
/// computed from accumulated principal-branch argument increments. Throws
/// UnresolvedWindingError if any node-to-node jump exceeds pi/2.
int winding_number(const cvec& values);

/// Scalar health metrics tracked along a branch. The first five are the
/// branch-continuation functionals; maxPhi and minPsiR are the additional
/// audit quantities.
struct HealthMetrics {
  double minA;         ///< min |Omega conj(phi) + (1/2) C(phi) conj(phi)|
  double sizeInv;      ///< 1 / (1 + |Omega| + C^{1+alpha}-type proxy norm of phi)
  double angleMargin;  ///< pi/2 - max |gamma|
  double minDphi;      ///< min |phi'|
  double minPhi;       ///< min |phi|
  double maxPhi;       ///< max |phi|
  double minPsiR;      ///< min over the boundary of dPsi/dr
};

HealthMetrics health_metrics(const GridTrace& trace, double omega);

/// Reconstruct phi' on the grid from the phase of A alone:
///   phi'(w) = exp{ (w/2 pi) \oint_T [theta(tau)/tau - theta(w)/w]/(tau - w) dtau },
/// theta = arg(A/conj A) unwrapped with theta(1) = 0. On a converged solution
/// this reproduces the trace derivative; the sup-norm defect against
/// trace.dphi is a solution-quality certificate.
cvec rh_reconstruct_dphi(const GridTrace& trace, double omega);

}  // namespace vstates
