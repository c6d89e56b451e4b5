#include "vstates/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "compensated.hpp"
#include "vstates/errors.hpp"
#include "vstates/fft.hpp"
#include "vstates/parallel.hpp"

namespace vstates {

namespace {

using cplx = std::complex<double>;
using detail::CompensatedSum;

constexpr double kSecantFloorSq = 1e-28;  // |phi_k - phi_j|^2 below this is a
                                          // grid-resolution self-intersection

// Shared trapezoid core: (1/N) sum_k I_k tau_k with
//   I_k = [g(tau_k) - g(tau_j)] / [phi(tau_k) - phi(tau_j)] * phi'(tau_k)
// for k != j and the supplied analytic limit on the diagonal.
cvec cauchy_core(const GridTrace& trace, const cvec& g, const cvec& diag) {
  const int n = trace.N;
  cvec out(static_cast<std::size_t>(n));
  const double inv_n = 1.0 / static_cast<double>(n);
  parallel::for_each_index(static_cast<std::size_t>(n), [&](std::size_t j) {
    const cplx phij = trace.phi[j];
    const cplx gj = g[j];
    CompensatedSum acc;
    for (int k = 0; k < n; ++k) {
      if (static_cast<std::size_t>(k) == j) {
        acc.add(diag[j] * trace.tau[j]);
        continue;
      }
      const cplx dphi_jk = trace.phi[k] - phij;
      if (std::norm(dphi_jk) < kSecantFloorSq) {
        throw SingularSecantError(
            "boundary self-intersection at grid resolution: |phi(tau_k) - "
            "phi(tau_j)| < 1e-14");
      }
      const cplx integrand = (g[k] - gj) / dphi_jk * trace.dphi[k];
      acc.add(integrand * trace.tau[k]);
    }
    out[j] = acc.value() * inv_n;
  });
  return out;
}

// Tangential complex derivative dg/dtau = (dg/dt) / (i tau), computed
// spectrally; this is the diagonal limit of the Cauchy integrand.
cvec tangential_derivative(const GridTrace& trace, const cvec& g) {
  cvec dgdt = fft::derivative_t(g);
  cvec out(dgdt.size());
  for (std::size_t j = 0; j < dgdt.size(); ++j) {
    out[j] = dgdt[j] / (cplx(0.0, 1.0) * trace.tau[j]);
  }
  return out;
}

// A without the trailing w factor: Omega conj(phi) + (1/2) C(phi) conj(phi).
// Shared by residual / coefficient_A / health metrics; dzPsi = -core/2.
cvec a_core(const GridTrace& trace, double omega, const cvec& cauchy_phibar) {
  cvec out(cauchy_phibar.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = omega * std::conj(trace.phi[j]) + 0.5 * cauchy_phibar[j];
  }
  return out;
}

// Unwrap the argument of a nonvanishing nodal sequence: principal value at
// node 0, then principal increments. Throws if a single step exceeds
// `max_jump` (grid too coarse to track the phase).
rvec unwrap_arg(const cvec& values, double max_jump, bool zero_at_node0) {
  const std::size_t n = values.size();
  rvec theta(n);
  double cur = std::arg(values[0]);
  theta[0] = cur;
  for (std::size_t j = 1; j < n; ++j) {
    const double jump = std::arg(values[j] / values[j - 1]);
    if (std::abs(jump) > max_jump) {
      throw UnresolvedWindingError(
          "argument jump between neighboring nodes exceeds the unwrap limit");
    }
    cur += jump;
    theta[j] = cur;
  }
  if (zero_at_node0) {
    const double t0 = theta[0];
    for (auto& t : theta) t -= t0;
  }
  return theta;
}

}  // namespace

cvec cauchy_apply(const GridTrace& trace, const cvec& g) {
  return cauchy_core(trace, g, tangential_derivative(trace, g));
}

cvec cauchy_conj_phi(const GridTrace& trace) {
  const std::size_t n = trace.phi.size();
  cvec g(n), diag(n);
  for (std::size_t j = 0; j < n; ++j) {
    g[j] = std::conj(trace.phi[j]);
    const cplx wbar = std::conj(trace.tau[j]);
    diag[j] = -std::conj(trace.dphi[j]) * wbar * wbar;
  }
  return cauchy_core(trace, g, diag);
}

rvec residual(const GridTrace& trace, double omega) {
  const cvec core = a_core(trace, omega, cauchy_conj_phi(trace));
  rvec out(core.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = std::imag(core[j] * trace.tau[j] * trace.dphi[j]);
  }
  return out;
}

cvec coefficient_A(const GridTrace& trace, double omega) {
  cvec core = a_core(trace, omega, cauchy_conj_phi(trace));
  for (std::size_t j = 0; j < core.size(); ++j) core[j] *= trace.tau[j];
  return core;
}

BoundaryDerivs stream_derivs_boundary(const GridTrace& trace, double omega) {
  const std::size_t n = trace.phi.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (std::norm(trace.dphi[j]) < 1e-24) {
      throw DegenerateDerivativeError(
          "|phi'| < 1e-12 on the grid; boundary derivative kernels undefined");
    }
  }

  BoundaryDerivs d;
  const cvec cpb = cauchy_conj_phi(trace);
  d.dzPsi.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    d.dzPsi[j] = -0.5 * omega * std::conj(trace.phi[j]) - 0.25 * cpb[j];
  }

  // Exterior second/third derivative kernels; phi'' from the spectral
  // tangential derivative of phi'.
  const cvec ddphi = tangential_derivative(trace, trace.dphi);
  cvec f2(n), f3(n);
  for (std::size_t j = 0; j < n; ++j) {
    const cplx w = trace.tau[j];
    const cplx dp = trace.dphi[j];
    const cplx ddp = ddphi[j];
    const cplx cdp = std::conj(dp);
    const cplx w2 = w * w, w3 = w2 * w, w4 = w2 * w2;
    const cplx dp2 = dp * dp, dp3 = dp2 * dp;
    f2[j] = cdp / (w2 * dp);
    f3[j] = -2.0 * cdp / (w3 * dp2) - std::conj(ddp) / (w4 * dp2) -
            cdp * ddp / (w2 * dp3);
  }
  cvec c2 = cauchy_apply(trace, f2);
  cvec c3 = cauchy_apply(trace, f3);
  d.dz2Psi.resize(n);
  d.dz3Psi.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    d.dz2Psi[j] = 0.25 * c2[j];
    d.dz3Psi[j] = 0.25 * c3[j];
  }

  // Polar combinations at z = phi. With u1 = z dzPsi, u2 = u1 + z^2 dz2Psi,
  // u3 = u1 + 3 z^2 dz2Psi + z^3 dz3Psi and Psi_{z zbar} = -Omega/2 on the
  // exterior side:
  //   dPsi/dtheta            = -2 Im u1
  //   r dPsi/dr              =  2 Re u1
  //   d/dtheta (r dPsi/dr)   = -2 Im u2
  //   (r d/dr)^2 Psi         =  2 Re u2 - Omega |z|^2
  //   d^2 Psi/dtheta^2       = -2 Re u2 - Omega |z|^2
  //   d^2/dtheta^2 (r dPsi/dr) = -2 Re u3 - Omega |z|^2
  d.dthPsi.resize(n);
  d.rdrPsi.resize(n);
  d.dth_rdrPsi.resize(n);
  d.rdr2Psi.resize(n);
  d.dth2Psi.resize(n);
  d.dth2_rdrPsi.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const cplx z = trace.phi[j];
    const cplx z2 = z * z;
    const cplx u1 = z * d.dzPsi[j];
    const cplx u2 = u1 + z2 * d.dz2Psi[j];
    const cplx u3 = u1 + 3.0 * z2 * d.dz2Psi[j] + z2 * z * d.dz3Psi[j];
    const double wr2 = omega * std::norm(z);
    d.dthPsi[j] = -2.0 * u1.imag();
    d.rdrPsi[j] = 2.0 * u1.real();
    d.dth_rdrPsi[j] = -2.0 * u2.imag();
    d.rdr2Psi[j] = 2.0 * u2.real() - wr2;
    d.dth2Psi[j] = -2.0 * u2.real() - wr2;
    d.dth2_rdrPsi[j] = -2.0 * u3.real() - wr2;
  }
  return d;
}

PolarQuantities polar_quantities(const GridTrace& trace) {
  const std::size_t n = trace.phi.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (std::norm(trace.phi[j]) < 1e-24) {
      throw ZeroModulusError("|phi| vanishes on the grid");
    }
  }
  PolarQuantities p;
  p.rho.resize(n);
  p.drho.resize(n);
  p.dtheta.resize(n);
  cvec ratio(n);  // w phi'/phi
  for (std::size_t j = 0; j < n; ++j) {
    p.rho[j] = std::abs(trace.phi[j]);
    ratio[j] = trace.tau[j] * trace.dphi[j] / trace.phi[j];
    p.dtheta[j] = ratio[j].real();
    p.drho[j] = -p.rho[j] * ratio[j].imag();
  }
  p.theta = unwrap_arg(trace.phi, std::numbers::pi / 2, false);
  p.gamma = unwrap_arg(ratio, std::numbers::pi / 2, false);
  return p;
}

int winding_number(const cvec& values) {
  double max_mod = 0.0, min_mod = std::numeric_limits<double>::infinity();
  for (const auto& v : values) {
    const double m = std::abs(v);
    max_mod = std::max(max_mod, m);
    min_mod = std::min(min_mod, m);
  }
  if (!(min_mod > 1e-14 * max_mod) || max_mod == 0.0) {
    throw ZeroOnContourError("winding number of a (near-)vanishing sequence");
  }
  double total = 0.0;
  const std::size_t n = values.size();
  for (std::size_t j = 0; j < n; ++j) {
    const double jump = std::arg(values[(j + 1) % n] / values[j]);
    if (std::abs(jump) > std::numbers::pi / 2) {
      throw UnresolvedWindingError(
          "node-to-node argument jump exceeds pi/2; grid too coarse to "
          "resolve the winding");
    }
    total += jump;
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

HealthMetrics health_metrics(const GridTrace& trace, double omega) {
  const std::size_t n = trace.phi.size();
  const cvec core = a_core(trace, omega, cauchy_conj_phi(trace));

  HealthMetrics h{};
  h.minA = std::numeric_limits<double>::infinity();
  h.minDphi = std::numeric_limits<double>::infinity();
  h.minPhi = std::numeric_limits<double>::infinity();
  h.maxPhi = 0.0;
  h.minPsiR = std::numeric_limits<double>::infinity();
  double max_dphi = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    h.minA = std::min(h.minA, std::abs(core[j]));
    const double adp = std::abs(trace.dphi[j]);
    h.minDphi = std::min(h.minDphi, adp);
    max_dphi = std::max(max_dphi, adp);
    const double ap = std::abs(trace.phi[j]);
    h.minPhi = std::min(h.minPhi, ap);
    h.maxPhi = std::max(h.maxPhi, ap);
    // Psi_r = 2 Re[z dzPsi]/|z| with dzPsi = -core/2.
    const double psi_r = -std::real(trace.phi[j] * core[j]) / ap;
    h.minPsiR = std::min(h.minPsiR, psi_r);
  }

  // Hoelder-type proxy for the C^{1+alpha} norm (alpha = 1): sup norms of phi
  // and phi' plus the largest first divided difference of phi' over node
  // pairs at dyadic separations d, measured in arclength of t.
  double max_divdiff = 0.0;
  const double dt = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t d = 1; d <= n / 2; d *= 2) {
    const double sep = dt * static_cast<double>(d);
    for (std::size_t j = 0; j < n; ++j) {
      const double diff = std::abs(trace.dphi[(j + d) % n] - trace.dphi[j]);
      max_divdiff = std::max(max_divdiff, diff / sep);
    }
  }
  const double proxy = h.maxPhi + max_dphi + max_divdiff;
  h.sizeInv = 1.0 / (1.0 + std::abs(omega) + proxy);

  const PolarQuantities p = polar_quantities(trace);
  double max_gamma = 0.0;
  for (double g : p.gamma) max_gamma = std::max(max_gamma, std::abs(g));
  h.angleMargin = std::numbers::pi / 2 - max_gamma;
  return h;
}

cvec rh_reconstruct_dphi(const GridTrace& trace, double omega) {
  const cvec a = coefficient_A(trace, omega);
  if (winding_number(a) != 0) {
    throw WindingNonzeroError(
        "coefficient A has nonzero winding number; phase reconstruction "
        "undefined");
  }
  const std::size_t n = a.size();
  cvec ratio(n);  // A/conj(A), unimodular
  for (std::size_t j = 0; j < n; ++j) ratio[j] = a[j] / std::conj(a[j]);
  const rvec theta = unwrap_arg(ratio, std::numbers::pi / 2, true);
  {
    // The unwrapped phase must close around the circle (winding of A/conj A
    // is twice that of A, which was checked to vanish above).
    const double closure =
        std::arg(ratio[0] / ratio[n - 1]) + theta[n - 1] - theta[0];
    if (std::abs(closure) > 1e-6) {
      throw WindingNonzeroError("unwrapped phase of A/conj(A) fails to close");
    }
  }

  cvec theta_c(theta.begin(), theta.end());
  const cvec dthdt_c = fft::derivative_t(theta_c);

  // exponent E(w) = (w/2 pi) oint [theta(tau)/tau - theta(w)/w]/(tau - w) dtau
  // by the same trapezoid rule; diagonal limit i[theta_t/(i tau) - theta/tau].
  cvec e(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  parallel::for_each_index(n, [&](std::size_t j) {
    const cplx tj = trace.tau[j];
    const double thj = theta[j];
    CompensatedSum acc;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) {
        acc.add((dthdt_c[j].real() - cplx(0.0, 1.0) * thj) / tj);
        continue;
      }
      const cplx tk = trace.tau[k];
      acc.add(cplx(0.0, 1.0) * (theta[k] - thj * tk / tj) / (tk - tj));
    }
    e[j] = acc.value() * (tj * inv_n);
  });

  cvec out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = std::exp(e[j]);
  return out;
}

}  // namespace vstates
