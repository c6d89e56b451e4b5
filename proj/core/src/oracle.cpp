#include "vstates/oracle.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "vstates/solver.hpp"

namespace vstates::oracle {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

double simpson_slice(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a,
                     double fa, double b, double fb, double m, double fm,
                     double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson_slice(a, fa, m, fm, flm);
  const double right = simpson_slice(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = simpson_slice(a, fa, b, fb, fm);
  return adaptive_step(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

cplx cauchy_reference(const cfun& phi, const cfun& dphi, const cfun& g,
                      const cfun& dg, double s) {
  // C(phi) g (w) = (1/2 pi) \int_0^{2pi} [g(tau)-g(w)]/[phi(tau)-phi(w)]
  //                                      phi'(tau) tau dt,  tau = e^{it}.
  // The singularity at t = s is removable (limit dg(w) w). A small symmetric
  // window around t = s is integrated by its midpoint value to avoid the
  // catastrophic cancellation of the raw difference quotient there; the
  // window error is O(a^3).
  const cplx w = std::polar(1.0, s);
  const cplx gw = g(w);
  const cplx phiw = phi(w);
  const auto integrand = [&](double t) -> cplx {
    const cplx tau = std::polar(1.0, t);
    return (g(tau) - gw) / (phi(tau) - phiw) * dphi(tau) * tau;
  };
  const double a = 1e-5;
  const auto re = [&](double t) { return integrand(t).real(); };
  const auto im = [&](double t) { return integrand(t).imag(); };
  const cplx window = 2.0 * a * (dg(w) * w);
  const double tol = 1e-12;
  const cplx body(adaptive_simpson(re, s + a, s + 2.0 * kPi - a, tol),
                  adaptive_simpson(im, s + a, s + 2.0 * kPi - a, tol));
  return (body + window) / (2.0 * kPi);
}

cplx dzpsi_area_quadrature(const GridTrace& trace, cplx z, int nr, int nt) {
  // dpsi/dz = (1/4 pi) \iint_D dA(zeta)/(z - zeta) over the star-shaped
  // patch, zeta = sigma * B(t) with B the boundary point; the area element is
  // sigma Im(conj(B) B') dsigma dt. Gauss-Legendre in sigma (simple fixed
  // nodes here), trapezoid in t.
  std::vector<double> gx(nr), gw(nr);
  // Gauss-Legendre on [0, 1] by Newton on the Legendre recurrence.
  for (int i = 0; i < (nr + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (nr + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= nr; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = nr * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double wgt = 2.0 / ((1.0 - x * x) * dp * dp);
    gx[i] = 0.5 * (1.0 - x);
    gx[nr - 1 - i] = 0.5 * (1.0 + x);
    gw[i] = 0.5 * wgt;
    gw[nr - 1 - i] = 0.5 * wgt;
  }

  const int N = trace.N;
  cplx acc{0.0, 0.0};
  for (int j = 0; j < nt; ++j) {
    // Resample the boundary on nt uniform angles via the trace grid when the
    // sizes match, otherwise by nearest trace node (nt should divide N).
    const int idx = static_cast<int>(
        std::llround(static_cast<double>(j) * N / nt)) % N;
    const cplx b = trace.phi[idx];
    const cplx bp = cplx(0.0, 1.0) * trace.tau[idx] * trace.dphi[idx];
    const double jac = std::imag(std::conj(b) * bp);
    for (int i = 0; i < nr; ++i) {
      const double sigma = gx[i];
      acc += gw[i] * sigma * jac / (z - sigma * b);
    }
  }
  return acc * (2.0 * kPi / nt) / (4.0 * kPi);
}

cplx disk_dzpsi(cplx z) {
  if (std::abs(z) <= 1.0) return std::conj(z) / 4.0;
  return 1.0 / (4.0 * z);
}

double ellipse_omega(double c) { return (1.0 - c * c) / 4.0; }

cplx ellipse_dzpsi_interior(double c, cplx z) {
  const double a = 1.0 + c, b = 1.0 - c;
  return cplx(b * z.real(), -a * z.imag()) / (2.0 * (a + b));
}

namespace {
cplx ellipse_W(double c, cplx z) {
  // Inverse of z = W + c/W with |W| >= sqrt(c): branch of sqrt(z^2 - 4c)
  // aligned with z so that W ~ z at infinity.
  cplx s = std::sqrt(z * z - 4.0 * c);
  if (std::real(std::conj(z) * s) < 0.0) s = -s;
  return 0.5 * (z + s);
}
}  // namespace

cplx ellipse_dzpsi_exterior(double c, cplx z) {
  return (1.0 - c * c) / (4.0 * ellipse_W(c, z));
}

cplx ellipse_dzpsi_boundary(double c, cplx w) {
  return (1.0 - c * c) / (4.0 * w);
}

cplx ellipse_dz2psi_boundary(double c, cplx w) {
  return -(1.0 - c * c) / (4.0 * (w * w - c));
}

cplx ellipse_dz3psi_boundary(double c, cplx w) {
  const cplx d = w * w - c;
  return (1.0 - c * c) * w * w * w / (2.0 * d * d * d);
}

std::vector<std::vector<double>> dense_fd_jacobian(const PatchCoeffs& base,
                                                   double omega, int N,
                                                   double eps) {
  const int modes = base.modes();
  std::vector<std::vector<double>> jac(
      modes, std::vector<double>(modes, 0.0));
  for (int j = 0; j < modes; ++j) {
    PatchCoeffs plus = base, minus = base;
    plus.a[j] += eps;
    minus.a[j] -= eps;
    const std::vector<double> fp = eval_FM(plus, omega, N);
    const std::vector<double> fm = eval_FM(minus, omega, N);
    for (int i = 0; i < modes; ++i) {
      jac[i][j] = (fp[i] - fm[i]) / (2.0 * eps);
    }
  }
  return jac;
}

}  // namespace vstates::oracle
