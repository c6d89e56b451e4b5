#include "vstates/field.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>
#include <utility>

#include "compensated.hpp"
#include "vstates/boundary.hpp"
#include "vstates/errors.hpp"
#include "vstates/parallel.hpp"

namespace vstates {

namespace {

using cplx = std::complex<double>;
using detail::CompensatedSum;

constexpr double kPi = std::numbers::pi;

// Gauss-Legendre nodes/weights on [-1, 1], cached per order. Newton on the
// Legendre recurrence; deterministic.
struct GaussRule {
  std::vector<double> x, w;
};

const GaussRule& gauss_rule(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-style initial guess for the i-th root of P_n.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.x[i] = -x;
    rule.x[n - 1 - i] = x;
    const double wi = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.w[i] = wi;
    rule.w[n - 1 - i] = wi;
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace

const char* to_string(CriticalKind k) {
  switch (k) {
    case CriticalKind::Saddle: return "Saddle";
    case CriticalKind::Center: return "Center";
    case CriticalKind::Degenerate: return "Degenerate";
  }
  return "Unknown";
}

namespace {

// Fine quadrature grid: the trace is band-limited, so resynthesizing it on a
// denser grid is exact and pushes the contour-rule accuracy to within a few
// fine spacings of the boundary.
constexpr int kQuadratureGrid = 8192;

}  // namespace

TraceField::TraceField(const GridTrace& trace, double omega)
    : m_(trace.m), omega_(omega) {
  const int n = trace.N;
  const BoundaryDerivs bd = stream_derivs_boundary(trace, omega);
  const PolarQuantities pq = polar_quantities(trace);
  theta_b_ = pq.theta;
  rho_b_ = pq.rho;
  max_rho_ = *std::max_element(rho_b_.begin(), rho_b_.end());
  min_rho_ = *std::min_element(rho_b_.begin(), rho_b_.end());

  phi_i_ = fft::TrigInterp(trace.phi);
  rho_i_ = fft::TrigInterp(rho_b_);

  // Side-aware Taylor data. dpsi/dz is holomorphic off the patch, so on each
  // side dPsi/dz = (holomorphic part)(z) + c conj(z) with c constant:
  //   exterior: G(z) - (omega/2) conj(z),        G = dpsi/dz outside,
  //   interior: H(z) + ((1-2 omega)/4) conj(z),  H = dpsi/dz - conj(z)/4.
  // Higher coefficients follow from tangential spectral derivatives,
  // dF/dz along the boundary = (dF/dt) / (i tau phi').
  {
    cvec g(static_cast<std::size_t>(n)), h(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      const cplx pb = std::conj(trace.phi[j]);
      g[j] = bd.dzPsi[j] + 0.5 * omega * pb;
      h[j] = bd.dzPsi[j] - 0.25 * (1.0 - 2.0 * omega) * pb;
    }
    const auto dz_along = [&](const cvec& f) {
      cvec d = fft::derivative_t(f);
      for (int j = 0; j < n; ++j) {
        d[j] /= cplx(0.0, 1.0) * trace.tau[j] * trace.dphi[j];
      }
      return d;
    };
    for (int order = 0; order < 4; ++order) {
      gext_i_[order] = fft::TrigInterp(g);
      hint_i_[order] = fft::TrigInterp(h);
      if (order < 3) {
        g = dz_along(g);
        h = dz_along(h);
      }
    }
  }

  std::vector<double> theta_dev(theta_b_.size());
  const double dt = 2.0 * kPi / static_cast<double>(n);
  for (std::size_t j = 0; j < theta_dev.size(); ++j) {
    theta_dev[j] = theta_b_[j] - dt * static_cast<double>(j);
  }
  theta_dev_i_ = fft::TrigInterp(theta_dev);

  if (n >= kQuadratureGrid) {
    N_ = n;
    tau_ = trace.tau;
    phi_ = trace.phi;
    dphi_ = trace.dphi;
  } else {
    const PatchCoeffs coeffs = recover_coeffs(trace, (n / 2) / trace.m);
    GridTrace fine = synthesize(coeffs, kQuadratureGrid);
    N_ = fine.N;
    tau_ = std::move(fine.tau);
    phi_ = std::move(fine.phi);
    dphi_ = std::move(fine.dphi);
  }
  band_t_ = 6.0 * 2.0 * kPi / static_cast<double>(N_);

  // |phi'|(t) interpolant on the trace grid (cheap to evaluate); the max is
  // taken over the fine grid.
  std::vector<double> dphi_mag(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) dphi_mag[j] = std::abs(trace.dphi[j]);
  dphi_mag_i_ = fft::TrigInterp(dphi_mag);
  for (const auto& d : dphi_) max_dphi_ = std::max(max_dphi_, std::abs(d));
}

double TraceField::theta_to_t(double theta) const {
  // theta(t) = t + dev(t) with dev periodic and small; Newton from t = theta.
  double t = theta;
  for (int iter = 0; iter < 30; ++iter) {
    const double f = t + theta_dev_i_.eval_real(t) - theta;
    const double df = 1.0 + theta_dev_i_.derivative(t).real();
    const double step = f / df;
    t -= step;
    if (std::abs(step) < 1e-14) break;
  }
  return t;
}

double TraceField::boundary_radius(double theta) const {
  return rho_i_.eval_real(theta_to_t(theta));
}

double TraceField::max_radius() const { return max_rho_; }

bool TraceField::inside(cplx z) const {
  const double r = std::abs(z);
  if (r >= max_rho_) return false;
  if (r < min_rho_) return true;
  return r < boundary_radius(std::arg(z));
}

cplx TraceField::contour_dzpsi(cplx z) const {
  // dpsi/dz = (1/8 pi i) oint (conj zeta - conj z)/(z - zeta) dzeta by the
  // N-point trapezoid rule; the same closed contour form is exact on both
  // sides of the boundary (the interior area term enters through the jump of
  // the contour integral). Then dPsi/dz = dpsi/dz - (Omega/2) conj z.
  const cplx zb = std::conj(z);
  CompensatedSum acc;
  for (int k = 0; k < N_; ++k) {
    acc.add(tau_[k] * dphi_[k] * (std::conj(phi_[k]) - zb) / (z - phi_[k]));
  }
  return acc.value() / (4.0 * static_cast<double>(N_)) - 0.5 * omega_ * zb;
}

cplx TraceField::boundary_taylor(cplx z, double t_foot, bool exterior) const {
  // Cubic Taylor of the side's holomorphic part about the foot point, plus
  // the exact conjugate-linear term of that side.
  const cplx z0 = phi_i_.eval(t_foot);
  const cplx d = z - z0;
  const auto& c = exterior ? gext_i_ : hint_i_;
  const cplx series =
      c[0].eval(t_foot) +
      d * (c[1].eval(t_foot) +
           d * (0.5 * c[2].eval(t_foot) + d * ((1.0 / 6.0) * c[3].eval(t_foot))));
  const double a = exterior ? -0.5 * omega_ : 0.25 * (1.0 - 2.0 * omega_);
  return series + a * std::conj(z);
}

cplx TraceField::dzPsi_on_ray(double r, double theta, double t_foot,
                              double R) const {
  const double dphi_mag = std::max(dphi_mag_i_.eval_real(t_foot), 1e-12);
  const double dist_t = (r - R) / dphi_mag;
  const cplx z = std::polar(r, theta);
  if (std::abs(dist_t) < band_t_) {
    return boundary_taylor(z, t_foot, r >= R);
  }
  return contour_dzpsi(z);
}

cplx TraceField::dzPsi(cplx z) const {
  const double r = std::abs(z);
  const double theta = std::arg(z);
  // Quick reject: far from the annulus containing the boundary collar.
  const double widest_band = band_t_ * max_dphi_ * 1.5;
  if (r > max_rho_ + widest_band || r < min_rho_ - widest_band) {
    return contour_dzpsi(z);
  }
  const double t_foot = theta_to_t(theta);
  return dzPsi_on_ray(r, theta, t_foot, rho_i_.eval_real(t_foot));
}

double TraceField::psi_r(cplx z) const {
  const double r = std::abs(z);
  if (r < 1e-300) return 0.0;
  return 2.0 * std::real(z * dzPsi(z)) / r;
}

double TraceField::psi_r_on_ray(double r, double theta, double t_foot,
                                double R) const {
  if (r < 1e-300) return 0.0;
  const cplx z = std::polar(r, theta);
  return 2.0 * std::real(z * dzPsi_on_ray(r, theta, t_foot, R)) / r;
}

cplx TraceField::dz2Psi_exterior(cplx z) const {
  const double r = std::abs(z);
  const double theta = std::arg(z);
  const double t_foot = theta_to_t(theta);
  const double R = rho_i_.eval_real(t_foot);
  const double dphi_mag = std::max(dphi_mag_i_.eval_real(t_foot), 1e-12);
  if (r < R || (r - R) / dphi_mag < band_t_) {
    throw TooCloseToBoundaryError(
        "second-derivative contour quadrature needs an exterior point "
        "outside the boundary collar");
  }
  const cplx zb = std::conj(z);
  CompensatedSum acc;
  for (int k = 0; k < N_; ++k) {
    const cplx d = z - phi_[k];
    acc.add(tau_[k] * dphi_[k] * (std::conj(phi_[k]) - zb) / (d * d));
  }
  return -acc.value() / (4.0 * static_cast<double>(N_));
}

double TraceField::psi_integral(double r, double theta, double t_foot,
                                double R) const {
  // Gauss-Legendre of Psi_r along the radial segment from the boundary
  // (Psi = 0 there) to r, split at the collar seam so each panel has a
  // smooth integrand; node count doubles from 24 until two consecutive
  // totals agree to 1e-10.
  const double dphi_mag = std::max(dphi_mag_i_.eval_real(t_foot), 1e-12);
  const double seam_width = band_t_ * dphi_mag;
  std::vector<std::pair<double, double>> panels;
  if (r >= R) {
    const double seam = std::min(R + seam_width, r);
    panels.emplace_back(R, seam);
    if (r > seam) panels.emplace_back(seam, r);
  } else {
    const double seam = std::max(R - seam_width, r);
    panels.emplace_back(R, seam);
    if (r < seam) panels.emplace_back(seam, r);
  }

  double prev = 0.0;
  for (int doubling = 0; doubling <= 3; ++doubling) {
    const int order = 24 << doubling;
    const GaussRule& rule = gauss_rule(order);
    double total = 0.0;
    for (const auto& [a, b] : panels) {
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      if (half == 0.0) continue;
      double s = 0.0;
      for (int i = 0; i < order; ++i) {
        const double ri = mid + half * rule.x[i];
        s += rule.w[i] * psi_r_on_ray(ri, theta, t_foot, R);
      }
      total += half * s;
    }
    if (doubling > 0 && std::abs(total - prev) <= 1e-10) return total;
    prev = total;
  }
  throw QuadratureStallError(
      "radial quadrature of Psi_r failed to converge after three doublings");
}

double TraceField::psi(cplx z) const {
  const double r = std::abs(z);
  const double theta = std::arg(z);
  const double t_foot = theta_to_t(theta);
  return psi_integral(r, theta, t_foot, rho_i_.eval_real(t_foot));
}

double TraceField::rc_on_ray(double theta, double t_foot, double R) const {
  double lo = R + 1e-9 * std::max(R, 1.0);
  const double f_lo = psi_r_on_ray(lo, theta, t_foot, R);
  if (f_lo <= 0.0) {
    throw NoBracketError(
        "dPsi/dr is not positive just outside the boundary; corotation "
        "radius undefined (solution outside the nodal regime)");
  }
  double hi = 2.5 * max_rho_;
  if (omega_ > 0.0) hi = std::max(hi, 1.5 / std::sqrt(2.0 * omega_));
  double f_hi = psi_r_on_ray(hi, theta, t_foot, R);
  if (f_hi >= 0.0) {
    hi *= 2.0;  // one retry with a larger outer radius
    f_hi = psi_r_on_ray(hi, theta, t_foot, R);
    if (f_hi >= 0.0) {
      throw NoBracketError("dPsi/dr does not change sign by the outer radius");
    }
  }
  for (int iter = 0; iter < 40; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = psi_r_on_ray(mid, theta, t_foot, R);
    if (f_mid > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Newton polish on the bisection result, guarded to stay in the bracket.
  double rc = 0.5 * (lo + hi);
  for (int iter = 0; iter < 6; ++iter) {
    const double h = 1e-7 * rc;
    const double f = psi_r_on_ray(rc, theta, t_foot, R);
    const double df = (psi_r_on_ray(rc + h, theta, t_foot, R) -
                       psi_r_on_ray(rc - h, theta, t_foot, R)) /
                      (2.0 * h);
    if (df == 0.0) break;
    const double next = rc - f / df;
    if (!(next > lo - 1e-6 && next < hi + 1e-6)) break;
    const double step = std::abs(next - rc);
    rc = next;
    if (step < 1e-14 * rc) break;
  }
  return rc;
}

double TraceField::rc_radius(double theta) const {
  const double t_foot = theta_to_t(theta);
  return rc_on_ray(theta, t_foot, rho_i_.eval_real(t_foot));
}

cplx dzPsi_point(const GridTrace& trace, double omega, cplx z) {
  return TraceField(trace, omega).dzPsi(z);
}

double psi_point(const GridTrace& trace, double omega, cplx z) {
  return TraceField(trace, omega).psi(z);
}

std::vector<double> rc_curve(const GridTrace& trace, double omega,
                             const std::vector<double>& thetas) {
  const TraceField field(trace, omega);
  std::vector<double> out(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    out[i] = field.rc_radius(thetas[i]);
  }
  return out;
}

std::vector<CriticalPoint> find_critical_points(const GridTrace& trace,
                                                double omega) {
  const TraceField field(trace, omega);
  const double sector = kPi / static_cast<double>(trace.m);

  std::vector<CriticalPoint> out;
  for (const double theta0 : {0.0, sector}) {
    const double r0 = field.rc_radius(theta0);
    cplx z = std::polar(r0, theta0);

    // Newton on grad Psi = 0 written as dPsi/dz = 0. The differential is
    // d(dzPsi) = B dz + A d(conj z) with A = Psi_{z zbar} = -Omega/2 outside
    // the patch; B is estimated from central differences of the analytic
    // first-derivative field.
    const double a = -0.5 * omega;
    bool converged = false;
    for (int iter = 0; iter < 50; ++iter) {
      const cplx g = field.dzPsi(z);
      const double scale = std::max(1.0, std::abs(omega) * std::abs(z));
      if (std::abs(g) < 1e-13 * scale) {
        converged = true;
        break;
      }
      const double h = 1e-6 * std::max(std::abs(z), 1.0);
      const cplx dx =
          (field.dzPsi(z + h) - field.dzPsi(z - h)) / (2.0 * h);
      const cplx dy = (field.dzPsi(z + cplx(0.0, h)) -
                       field.dzPsi(z - cplx(0.0, h))) /
                      cplx(0.0, 2.0 * h);
      const cplx b = 0.5 * ((dx - a) + (dy + a));
      const double denom = std::norm(b) - a * a;
      if (denom == 0.0) break;
      cplx step = (a * std::conj(g) - std::conj(b) * g) / denom;
      const double max_step = 0.3 * std::abs(z);
      if (std::abs(step) > max_step) step *= max_step / std::abs(step);
      z += step;
      if (std::abs(step) < 1e-15 * std::abs(z)) {
        converged = std::abs(field.dzPsi(z)) < 1e-11 * scale;
        break;
      }
    }
    if (!converged) {
      throw NewtonDivergedError(
          "critical-point search did not converge from the corotation seed");
    }

    const double r = std::abs(z);
    const double theta = std::arg(z);
    // Second derivatives by central differences of dzPsi with the pinned
    // step 1e-5 * r; at a critical point the polar Hessian determinant is
    // r^2 times the Cartesian one, det = 4 (A^2 - |B|^2).
    const double h = 1e-5 * r;
    const cplx dx = (field.dzPsi(z + h) - field.dzPsi(z - h)) / (2.0 * h);
    const cplx dy =
        (field.dzPsi(z + cplx(0.0, h)) - field.dzPsi(z - cplx(0.0, h))) /
        cplx(0.0, 2.0 * h);
    const double a_fd = 0.5 * std::real(dx - dy);
    const cplx b_fd = 0.5 * (dx + dy);
    const double det = 4.0 * (a_fd * a_fd - std::norm(b_fd)) * r * r;

    CriticalPoint cp;
    cp.r = r;
    cp.theta = theta;
    cp.hessian_det = det;
    if (std::abs(det) < 1e-10) {
      cp.kind = CriticalKind::Degenerate;
    } else {
      cp.kind = det < 0.0 ? CriticalKind::Saddle : CriticalKind::Center;
    }
    cp.psi_value = field.psi(z);
    cp.distance_to_boundary = r - field.boundary_radius(theta);
    out.push_back(cp);
  }
  return out;
}

FieldGrid sample_field(const GridTrace& trace, double omega, int nr,
                       int ntheta, double r_max) {
  const TraceField field(trace, omega);
  FieldGrid grid;
  grid.m = trace.m;
  grid.nr = nr;
  grid.ntheta = ntheta;
  grid.r_max = r_max;
  grid.r.resize(nr);
  for (int i = 0; i < nr; ++i) {
    grid.r[i] = r_max * static_cast<double>(i) / (nr - 1);
  }
  const double sector = kPi / static_cast<double>(trace.m);
  grid.theta.resize(ntheta);
  for (int j = 0; j < ntheta; ++j) {
    grid.theta[j] = sector * static_cast<double>(j) / (ntheta - 1);
  }
  const std::size_t total = static_cast<std::size_t>(nr) * ntheta;
  grid.psi.assign(total, 0.0);
  grid.psi_r.assign(total, 0.0);
  grid.psi_theta.assign(total, 0.0);
  grid.inside.assign(total, 0);
  grid.near_boundary.assign(total, 0);

  // Column-parallel: each theta = const ray is one independent unit of work
  // (the cumulative radial integration is sequential within a column).
  parallel::for_each_index(static_cast<std::size_t>(ntheta), [&](std::size_t j) {
    const double theta = grid.theta[j];
    const double t_foot = field.theta_to_t(theta);
    const double R = field.rho_i_.eval_real(t_foot);
    const double dphi_mag =
        std::max(field.dphi_mag_i_.eval_real(t_foot), 1e-12);
    const double seam = field.band_t_ * dphi_mag;
    const GaussRule& rule = gauss_rule(16);

    // Derivatives at the nodes.
    for (int i = 0; i < nr; ++i) {
      const double r = grid.r[i];
      const std::size_t idx = static_cast<std::size_t>(i) * ntheta + j;
      grid.inside[idx] = r < R ? 1 : 0;
      grid.near_boundary[idx] = std::abs(r - R) < seam ? 1 : 0;
      if (r < 1e-300) {
        const cplx g = field.contour_dzpsi(cplx(0.0, 0.0));
        grid.psi_r[idx] = 2.0 * std::real(std::polar(1.0, theta) * g);
        grid.psi_theta[idx] = 0.0;
        continue;
      }
      const cplx z = std::polar(r, theta);
      const cplx g = field.dzPsi_on_ray(r, theta, t_foot, R);
      grid.psi_r[idx] = 2.0 * std::real(z * g) / r;
      grid.psi_theta[idx] = -2.0 * std::imag(z * g);
    }

    // Psi by cumulative radial integration anchored at Psi(R) = 0: walk
    // upward from the first node above the boundary, downward from the last
    // node below it, GL-16 per subsegment.
    const auto segment = [&](double ra, double rb) {
      const double mid = 0.5 * (ra + rb), half = 0.5 * (rb - ra);
      double s = 0.0;
      for (int q = 0; q < 16; ++q) {
        s += rule.w[q] * field.psi_r_on_ray(mid + half * rule.x[q], theta,
                                            t_foot, R);
      }
      return half * s;
    };
    int first_above = nr;
    for (int i = 0; i < nr; ++i) {
      if (grid.r[i] >= R) {
        first_above = i;
        break;
      }
    }
    double acc = 0.0;
    double prev_r = R;
    for (int i = first_above; i < nr; ++i) {
      acc += segment(prev_r, grid.r[i]);
      prev_r = grid.r[i];
      grid.psi[static_cast<std::size_t>(i) * ntheta + j] = acc;
    }
    acc = 0.0;
    prev_r = R;
    for (int i = first_above - 1; i >= 0; --i) {
      acc += segment(prev_r, grid.r[i]);
      prev_r = grid.r[i];
      grid.psi[static_cast<std::size_t>(i) * ntheta + j] = acc;
    }
  });
  return grid;
}

std::vector<ContourLine> contour_extract(const FieldGrid& grid, double level) {
  // Marching squares on the (r, theta) node grid. Crossing points live on
  // grid edges; an edge is keyed by its low-corner node and orientation so
  // segments from neighboring cells share endpoint keys exactly.
  const int nr = grid.nr, nt = grid.ntheta;
  const auto value = [&](int i, int j) {
    return grid.psi[static_cast<std::size_t>(i) * nt + j] - level;
  };
  struct Key {
    int i, j, dir;  // dir 0: edge (i,j)-(i+1,j); dir 1: edge (i,j)-(i,j+1)
    bool operator<(const Key& o) const {
      return std::tie(i, j, dir) < std::tie(o.i, o.j, o.dir);
    }
  };
  const auto point = [&](const Key& k) -> std::pair<double, double> {
    const double va = value(k.i, k.j);
    const double vb = k.dir == 0 ? value(k.i + 1, k.j) : value(k.i, k.j + 1);
    double s = va == vb ? 0.5 : va / (va - vb);
    s = std::clamp(s, 0.0, 1.0);
    if (k.dir == 0) {
      const double r = grid.r[k.i] + s * (grid.r[k.i + 1] - grid.r[k.i]);
      return {r, grid.theta[k.j]};
    }
    const double th =
        grid.theta[k.j] + s * (grid.theta[k.j + 1] - grid.theta[k.j]);
    return {grid.r[k.i], th};
  };

  // Collect cell segments as pairs of edge keys.
  std::multimap<Key, Key> adjacency;
  std::vector<std::pair<Key, Key>> segments;
  for (int i = 0; i + 1 < nr; ++i) {
    for (int j = 0; j + 1 < nt; ++j) {
      const double v00 = value(i, j), v10 = value(i + 1, j);
      const double v11 = value(i + 1, j + 1), v01 = value(i, j + 1);
      int mask = 0;
      if (v00 >= 0) mask |= 1;
      if (v10 >= 0) mask |= 2;
      if (v11 >= 0) mask |= 4;
      if (v01 >= 0) mask |= 8;
      if (mask == 0 || mask == 15) continue;
      const Key bottom{i, j, 0};            // between (i,j) and (i+1,j)
      const Key top{i, j + 1, 0};           // between (i,j+1) and (i+1,j+1)
      const Key left{i, j, 1};              // between (i,j) and (i,j+1)
      const Key right{i + 1, j, 1};         // between (i+1,j) and (i+1,j+1)
      auto emit = [&](Key a, Key b) { segments.emplace_back(a, b); };
      switch (mask) {
        case 1: case 14: emit(bottom, left); break;
        case 2: case 13: emit(bottom, right); break;
        case 4: case 11: emit(right, top); break;
        case 8: case 7: emit(left, top); break;
        case 3: case 12: emit(left, right); break;
        case 6: case 9: emit(bottom, top); break;
        case 5: case 10: {
          // Saddle cell: disambiguate with the center average.
          const double center = 0.25 * (v00 + v10 + v11 + v01);
          const bool center_in = center >= 0;
          if ((mask == 5) == center_in) {
            emit(bottom, right);
            emit(left, top);
          } else {
            emit(bottom, left);
            emit(right, top);
          }
          break;
        }
        default: break;
      }
    }
  }
  for (const auto& [a, b] : segments) {
    adjacency.emplace(a, b);
    adjacency.emplace(b, a);
  }

  // Stitch segments into polylines: open chains first (endpoints of degree
  // 1), then remaining cycles.
  std::map<Key, int> degree;
  for (const auto& [k, v] : adjacency) degree[k]++;
  const auto take_edge = [&](const Key& from, const Key& to) {
    auto range = adjacency.equal_range(from);
    for (auto it = range.first; it != range.second; ++it) {
      if (!(it->second < to) && !(to < it->second)) {
        adjacency.erase(it);
        break;
      }
    }
    range = adjacency.equal_range(to);
    for (auto it = range.first; it != range.second; ++it) {
      if (!(it->second < from) && !(from < it->second)) {
        adjacency.erase(it);
        break;
      }
    }
  };
  std::vector<ContourLine> lines;
  const auto walk = [&](Key start, bool closed) {
    ContourLine line;
    line.closed = closed;
    Key cur = start;
    line.points.push_back(point(cur));
    while (true) {
      auto it = adjacency.find(cur);
      if (it == adjacency.end()) break;
      const Key next = it->second;
      take_edge(cur, next);
      line.points.push_back(point(next));
      cur = next;
      if (closed && !(cur < start) && !(start < cur)) break;
    }
    if (line.points.size() >= 2) lines.push_back(std::move(line));
  };
  for (const auto& [k, deg] : degree) {
    if (deg == 1 && adjacency.find(k) != adjacency.end()) walk(k, false);
  }
  while (!adjacency.empty()) walk(adjacency.begin()->first, true);
  return lines;
}

}  // namespace vstates
