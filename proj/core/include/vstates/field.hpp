// vstates -- stream-function field evaluation off the boundary.
//
// The relative stream function Psi (rotating frame) is recovered from the
// boundary trace alone: dPsi/dz anywhere in the plane via a contour integral,
// Psi itself by radial path integration anchored to Psi = 0 on the patch
// boundary, critical points of Psi by pointwise Newton iteration, and level
// sets by marching squares on a polar sector grid.

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "vstates/fft.hpp"
#include "vstates/spectral.hpp"

namespace vstates {

enum class CriticalKind { Saddle, Center, Degenerate };

const char* to_string(CriticalKind k);

struct CriticalPoint {
  double r = 0.0;
  double theta = 0.0;
  CriticalKind kind = CriticalKind::Degenerate;
  double hessian_det = 0.0;  ///< polar-chart Hessian determinant
  double psi_value = 0.0;
  double distance_to_boundary = 0.0;  ///< r - R(theta), signed
};

struct FieldGrid;

/// Field evaluator bound to one trace + rotation number. Construction builds
/// the trigonometric interpolant of the trace and the boundary derivative
/// arrays used by the near-boundary Taylor correction.
class TraceField {
 public:
  TraceField(const GridTrace& trace, double omega);

  double omega() const { return omega_; }
  int symmetry() const { return m_; }

  /// Boundary radius R(theta) of the polar graph.
  double boundary_radius(double theta) const;

  /// Largest |phi| over the trace (outer radius of the patch).
  double max_radius() const;

  /// True if z lies inside the patch.
  bool inside(std::complex<double> z) const;

  /// dPsi/dz at any z. The contour quadrature runs on an internal fine grid
  /// (the trace is band-limited, so upsampling is exact) and degrades only
  /// within a few fine-grid spacings of the boundary; inside that collar the
  /// value is formed instead from a cubic Taylor step off the radial foot
  /// point, side-aware: dpsi/dz restricted to either side extends
  /// holomorphically, so each side has its own Taylor data plus an exact
  /// conjugate-linear term.
  std::complex<double> dzPsi(std::complex<double> z) const;

  /// Exterior d^2Psi/dz^2 via the differentiated contour integral. Throws
  /// TooCloseToBoundaryError inside the collar and for interior z.
  std::complex<double> dz2Psi_exterior(std::complex<double> z) const;

  /// Psi(z), anchored to Psi = 0 on the patch boundary, by Gauss-Legendre
  /// integration of dPsi/dr along the radial segment from the boundary.
  /// Node counts double (from 24) until two consecutive values agree to
  /// 1e-10; QuadratureStallError after three unsuccessful doublings.
  double psi(std::complex<double> z) const;

  /// Radius r_c(theta) > R(theta) where dPsi/dr = 0 (the corotation curve).
  /// Bracketed bisection refined by Newton; NoBracketError if no sign change
  /// is found even after raising the outer search radius once.
  double rc_radius(double theta) const;

  /// dPsi/dr at any z (0 at the origin by symmetry of the limit).
  double psi_r(std::complex<double> z) const;

 private:
  friend FieldGrid sample_field(const GridTrace&, double, int, int, double);

  // Ray-local workers: callers that walk one theta = const ray resolve the
  // boundary foot parameter t and radius R once and reuse them.
  std::complex<double> dzPsi_on_ray(double r, double theta, double t_foot,
                                    double R) const;
  double psi_r_on_ray(double r, double theta, double t_foot, double R) const;
  double psi_integral(double r, double theta, double t_foot, double R) const;
  std::complex<double> contour_dzpsi(std::complex<double> z) const;
  std::complex<double> boundary_taylor(std::complex<double> z, double t_foot,
                                       bool exterior) const;
  double theta_to_t(double theta) const;  // invert the polar angle map
  double rc_on_ray(double theta, double t_foot, double R) const;

  int m_ = 0;
  int N_ = 0;  // fine quadrature grid size (>= the trace grid size)
  double omega_ = 0.0;
  // Fine-grid samples driving the contour quadratures.
  std::vector<std::complex<double>> tau_, phi_, dphi_;
  // Trigonometric interpolants on the trace grid, for off-grid angles and the
  // near-boundary Taylor correction. gext_ holds dpsi/dz extended from the
  // exterior side and its first three z-derivatives along the boundary;
  // hint_ the same for the interior-side holomorphic part.
  fft::TrigInterp phi_i_;
  std::array<fft::TrigInterp, 4> gext_i_, hint_i_;
  fft::TrigInterp rho_i_, theta_dev_i_;   // |phi|(t) and arg(phi)(t) - t
  fft::TrigInterp dphi_mag_i_;            // |phi'|(t), sets the collar width
  std::vector<double> theta_b_, rho_b_;   // node polar data (theta unwrapped)
  double max_rho_ = 0.0;
  double min_rho_ = 0.0;
  double max_dphi_ = 0.0;
  double band_t_ = 0.0;  // collar half-width in t units (fine-grid spacings)
};

/// One-shot wrappers with the operator-style interface.
std::complex<double> dzPsi_point(const GridTrace& trace, double omega,
                                 std::complex<double> z);
double psi_point(const GridTrace& trace, double omega, std::complex<double> z);

/// Corotation radii at the given angles.
std::vector<double> rc_curve(const GridTrace& trace, double omega,
                             const std::vector<double>& thetas);

/// Critical points of Psi in the closed fundamental sector [0, pi/m]: the
/// saddle candidate on the theta = 0 ray and the center candidate on the
/// theta = pi/m ray. Classification by the sign of the polar Hessian
/// determinant from finite differences of the analytic gradient field;
/// |det| < 1e-10 is flagged Degenerate rather than classified.
std::vector<CriticalPoint> find_critical_points(const GridTrace& trace,
                                                double omega);

/// Polar sector grid of Psi and its first derivatives.
struct FieldGrid {
  int m = 0;
  int nr = 0, ntheta = 0;
  double r_max = 0.0;
  std::vector<double> r;       ///< nr radii (ascending, from 0)
  std::vector<double> theta;   ///< ntheta angles in [0, pi/m]
  std::vector<double> psi;     ///< row-major [ir*ntheta + jt]
  std::vector<double> psi_r;
  std::vector<double> psi_theta;
  std::vector<std::uint8_t> inside;
  std::vector<std::uint8_t> near_boundary;

  double at(const std::vector<double>& v, int ir, int jt) const {
    return v[static_cast<std::size_t>(ir) * ntheta + jt];
  }
};

FieldGrid sample_field(const GridTrace& trace, double omega, int nr,
                       int ntheta, double r_max);

/// A single level curve in (r, theta) coordinates.
struct ContourLine {
  std::vector<std::pair<double, double>> points;  ///< (r, theta)
  bool closed = false;
};

/// Marching-squares level curves of grid.psi at `level`.
std::vector<ContourLine> contour_extract(const FieldGrid& grid, double level);

}  // namespace vstates
