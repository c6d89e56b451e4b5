// vstates -- reference oracles.
//
// Independent evaluation paths used to pin expected values in tests and
// audits. Nothing here is called by the production solve path; the point is
// that these results are produced by *different* mathematics (closed forms,
// adaptive quadrature, area quadrature, dense finite differences) than the
// implementations they check.

#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "vstates/spectral.hpp"

namespace vstates::oracle {

using cfun = std::function<std::complex<double>(std::complex<double>)>;

/// C(phi) g at w = e^{is} by adaptive Simpson quadrature in t (target relative
/// error ~1e-12, practical accuracy <= 1e-9). phi, dphi, g, dg are callables
/// on the unit circle; dg is the tangential derivative dg/dtau used for the
/// removable singularity.
std::complex<double> cauchy_reference(const cfun& phi, const cfun& dphi,
                                      const cfun& g, const cfun& dg, double s);

/// dpsi/dz (non-rotating potential, Laplacian = 1 inside the patch) at z by
/// 2-D Gauss-Legendre area quadrature over the patch interior parametrized by
/// scaled trace rays. Valid for star-shaped patches and z off the boundary.
std::complex<double> dzpsi_area_quadrature(const GridTrace& trace,
                                           std::complex<double> z,
                                           int nr = 96, int nt = 512);

/// Closed-form unit-disk fields: dpsi/dz = conj(z)/4 inside, 1/(4z) outside.
std::complex<double> disk_dzpsi(std::complex<double> z);

/// Kirchhoff ellipse (trace w + c/w, semi-axes 1+c, 1-c, rotation number
/// (1-c^2)/4) closed forms.
double ellipse_omega(double c);
/// Interior dpsi/dz = (b x - i a y)/(2(a+b)).
std::complex<double> ellipse_dzpsi_interior(double c, std::complex<double> z);
/// Exterior dpsi/dz = (1-c^2)/(4 W(z)), W(z) = (z + sqrt(z^2-4c))/2.
std::complex<double> ellipse_dzpsi_exterior(double c, std::complex<double> z);
/// Boundary limits composed with the trace, as functions of w on the circle.
std::complex<double> ellipse_dzpsi_boundary(double c, std::complex<double> w);
std::complex<double> ellipse_dz2psi_boundary(double c, std::complex<double> w);
std::complex<double> ellipse_dz3psi_boundary(double c, std::complex<double> w);

/// Dense M x M finite-difference Jacobian of eval_FM at the given base point.
std::vector<std::vector<double>> dense_fd_jacobian(const PatchCoeffs& base,
                                                   double omega, int N,
                                                   double eps = 1e-7);

/// Adaptive 1-D Simpson quadrature of a real function (shared utility).
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol);

}  // namespace vstates::oracle
