#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "vstates/errors.hpp"
#include "vstates/field.hpp"
#include "vstates/oracle.hpp"
#include "vstates/solver.hpp"
#include "vstates/spectral.hpp"

using namespace vstates;
using cplx = std::complex<double>;

namespace {
constexpr double kPi = 3.14159265358979323846;

// One solved nontrivial patch shared by the field tests: two continuation
// steps below onset at m = 3 (a_1 ~ 0.20, visibly three-lobed).
struct MidBranch {
  PatchCoeffs coeffs{3, std::vector<double>(32, 0.0)};
  double omega = critical_omega(3) - 0.02;
  GridTrace trace;

  MidBranch() {
    NewtonConfig cfg;
    PatchCoeffs c{3, std::vector<double>(32, 0.0)};
    c.a[0] = std::sqrt(0.01);
    const double om3 = critical_omega(3);
    REQUIRE(newton_solve(c, om3 - 0.01, 512, cfg).converged);
    REQUIRE(newton_solve(c, om3 - 0.02, 512, cfg).converged);
    coeffs = c;
    trace = synthesize(coeffs, 512);
  }
};

const MidBranch& mid() {
  static MidBranch m;
  return m;
}
}  // namespace

TEST_CASE("disk field: dzPsi everywhere, including the boundary collar") {
  PatchCoeffs c{3, std::vector<double>(8, 0.0)};
  const GridTrace tr = synthesize(c, 256);
  const double om = 0.3;
  const TraceField f(tr, om);
  CHECK(f.omega() == om);
  CHECK(f.symmetry() == 3);
  CHECK(f.max_radius() == doctest::Approx(1.0).epsilon(1e-13));

  for (cplx z : {cplx(1.7, 0.4), cplx(-0.9, 1.4), cplx(0.3, -0.2),
                 cplx(0.05, 0.6)}) {
    const cplx want = oracle::disk_dzpsi(z) - 0.5 * om * std::conj(z);
    CHECK(std::abs(f.dzPsi(z) - want) < 1e-11);
  }
  // collar band on both sides of the boundary, down to 1e-4 away
  for (double r : {0.995, 0.9999, 1.0001, 1.005}) {
    const cplx z = r * std::exp(cplx(0, 0.7));
    const cplx want = oracle::disk_dzpsi(z) - 0.5 * om * std::conj(z);
    CHECK(std::abs(f.dzPsi(z) - want) < 1e-11);
  }
}

TEST_CASE("disk field: psi profile, corotation radius, radial derivative") {
  PatchCoeffs c{3, std::vector<double>(8, 0.0)};
  const GridTrace tr = synthesize(c, 256);
  const double om = 0.3;
  const TraceField f(tr, om);

  // exterior: Psi = (1/2) log r - Omega (r^2 - 1)/2, anchored to 0 at r = 1
  const double psi2 = f.psi(cplx(2.0, 0.0));
  CHECK(std::abs(psi2 - (0.5 * std::log(2.0) - 1.5 * om)) < 1e-10);
  // interior: Psi = (r^2 - 1)(1 - 2 Omega)/4
  const cplx zi(0.3, 0.2);
  const double ri2 = std::norm(zi);
  CHECK(std::abs(f.psi(zi) - (ri2 - 1.0) * (1.0 - 2.0 * om) / 4.0) < 1e-10);

  CHECK(std::abs(f.rc_radius(0.4) - 1.0 / std::sqrt(2.0 * om)) < 1e-9);

  CHECK(std::abs(f.psi_r(cplx(0.5, 0.0)) - 0.5 * (0.5 - om)) < 1e-11);
  const double r = 1.8;
  CHECK(std::abs(f.psi_r(cplx(0.0, r)) - (0.5 / r - om * r)) < 1e-11);
  CHECK(std::abs(f.psi_r(cplx(0.0, 0.0))) < 1e-11);
}

TEST_CASE("disk field: exterior second derivative and its guard rails") {
  PatchCoeffs c{3, std::vector<double>(8, 0.0)};
  const GridTrace tr = synthesize(c, 256);
  const TraceField f(tr, 0.3);
  for (cplx z : {cplx(1.7, 0.4), cplx(0.0, -2.2)}) {
    CHECK(std::abs(f.dz2Psi_exterior(z) + 0.25 / (z * z)) < 1e-10);
  }
  CHECK_THROWS_AS(f.dz2Psi_exterior(cplx(1.0001, 0.0)),
                  TooCloseToBoundaryError);
  CHECK_THROWS_AS(f.dz2Psi_exterior(cplx(0.5, 0.0)), TooCloseToBoundaryError);
}

TEST_CASE("corotation search reports when the regime is out of reach") {
  PatchCoeffs c{3, std::vector<double>(8, 0.0)};
  const GridTrace tr = synthesize(c, 256);
  // Omega = 0: dPsi/dr = 1/(2r) never vanishes outside the disk.
  CHECK_THROWS_AS(TraceField(tr, 0.0).rc_radius(0.1), NoBracketError);
  // Omega = 0.6: dPsi/dr is already negative at the boundary.
  CHECK_THROWS_AS(TraceField(tr, 0.6).rc_radius(0.1), NoBracketError);
}

TEST_CASE("ellipse field: interior and exterior closed forms") {
  const double cc = 0.3;
  PatchCoeffs c{2, std::vector<double>(16, 0.0)};
  c.a[0] = cc;
  const GridTrace tr = synthesize(c, 512);
  const double om = oracle::ellipse_omega(cc);
  const TraceField f(tr, om);
  for (cplx z : {cplx(1.9, 0.5), cplx(0.0, 1.6), cplx(-1.4, -1.0)}) {
    const cplx want =
        oracle::ellipse_dzpsi_exterior(cc, z) - 0.5 * om * std::conj(z);
    CHECK(std::abs(f.dzPsi(z) - want) < 1e-9);
  }
  for (cplx z : {cplx(0.4, 0.1), cplx(-0.8, 0.2), cplx(0.0, 0.3)}) {
    const cplx want =
        oracle::ellipse_dzpsi_interior(cc, z) - 0.5 * om * std::conj(z);
    CHECK(std::abs(f.dzPsi(z) - want) < 1e-9);
  }
  CHECK(f.boundary_radius(0.0) == doctest::Approx(1.0 + cc).epsilon(1e-12));
  CHECK(f.boundary_radius(kPi / 2) ==
        doctest::Approx(1.0 - cc).epsilon(1e-12));
  CHECK(f.inside(cplx(1.2, 0.0)));
  CHECK_FALSE(f.inside(cplx(0.0, 0.8)));
}

TEST_CASE("one-shot wrappers agree with a bound evaluator") {
  const auto& mb = mid();
  const TraceField f(mb.trace, mb.omega);
  const cplx z(1.9, 0.8);
  CHECK(std::abs(dzPsi_point(mb.trace, mb.omega, z) - f.dzPsi(z)) == 0.0);
  CHECK(psi_point(mb.trace, mb.omega, z) == f.psi(z));
}

TEST_CASE("contour evaluation matches the area-quadrature oracle") {
  PatchCoeffs c{3, std::vector<double>(4, 0.0)};
  c.a[0] = 0.12;
  const GridTrace tr = synthesize(c, 512);
  const TraceField f(tr, 0.0);
  const cplx z(1.8, 0.7);
  const cplx want = oracle::dzpsi_area_quadrature(tr, z, 160, 512);
  CHECK(std::abs(f.dzPsi(z) - want) < 1e-7);
}

TEST_CASE("critical points: trivial patches carry a degenerate ring") {
  PatchCoeffs c{3, std::vector<double>(8, 0.0)};
  const GridTrace tr = synthesize(c, 256);
  const double om = critical_omega(3);
  const auto cps = find_critical_points(tr, om);
  REQUIRE_FALSE(cps.empty());
  const double rc = 1.0 / std::sqrt(2.0 * om);
  for (const auto& cp : cps) {
    CHECK(cp.kind == CriticalKind::Degenerate);
    CHECK(std::abs(cp.r - rc) < 1e-6);
    CHECK(std::abs(cp.distance_to_boundary - (rc - 1.0)) < 1e-6);
  }
}

TEST_CASE("critical points: cat's-eye saddle and center off the disk") {
  const auto& mb = mid();
  const auto cps = find_critical_points(mb.trace, mb.omega);
  REQUIRE(cps.size() == 2);

  const CriticalPoint* saddle = nullptr;
  const CriticalPoint* center = nullptr;
  for (const auto& cp : cps) {
    if (std::abs(cp.theta) < 1e-8) saddle = &cp;
    if (std::abs(cp.theta - kPi / 3.0) < 1e-8) center = &cp;
  }
  REQUIRE(saddle != nullptr);
  REQUIRE(center != nullptr);
  CHECK(saddle->kind == CriticalKind::Saddle);
  CHECK(saddle->hessian_det < 0.0);
  CHECK(center->kind == CriticalKind::Center);
  CHECK(center->hessian_det > 0.0);
  // frozen window from the continuation reference run at this rotation number
  CHECK(saddle->r == doctest::Approx(1.289).epsilon(0.01));
  CHECK(saddle->distance_to_boundary == doctest::Approx(0.083).epsilon(0.15));
  CHECK(saddle->distance_to_boundary > 0.0);
  CHECK(center->distance_to_boundary > 0.0);
}

TEST_CASE("sampled sector grid reproduces the disk profile") {
  PatchCoeffs c{3, std::vector<double>(8, 0.0)};
  const GridTrace tr = synthesize(c, 256);
  const double om = 0.3;
  // 21 radii over [0, 2] puts one node exactly on the unit boundary, inside
  // the near-boundary collar band.
  const FieldGrid grid = sample_field(tr, om, 21, 12, 2.0);
  REQUIRE(grid.nr == 21);
  REQUIRE(grid.ntheta == 12);
  REQUIRE(grid.r.size() == 21);
  REQUIRE(grid.psi.size() == 21u * 12u);
  CHECK(grid.theta.front() == doctest::Approx(0.0));
  CHECK(grid.theta.back() == doctest::Approx(kPi / 3.0).epsilon(1e-12));

  int near = 0;
  for (int ir = 0; ir < grid.nr; ++ir) {
    const double r = grid.r[ir];
    for (int jt = 0; jt < grid.ntheta; ++jt) {
      const std::size_t idx =
          static_cast<std::size_t>(ir) * grid.ntheta + jt;
      const double psi = grid.at(grid.psi, ir, jt);
      const double psi_r = grid.at(grid.psi_r, ir, jt);
      const bool in = grid.inside[idx] != 0;
      if (grid.near_boundary[idx] != 0) {
        ++near;
        continue;  // values there are still good; flags are what we check
      }
      CHECK(in == (r < 1.0));
      const double want_psi = in ? (r * r - 1.0) * (1.0 - 2.0 * om) / 4.0
                                 : 0.5 * std::log(r) - om * (r * r - 1.0) / 2.0;
      const double want_psi_r = in ? r * (0.5 - om) : 0.5 / r - om * r;
      CHECK(std::abs(psi - want_psi) <= 1e-8);
      CHECK(std::abs(psi_r - want_psi_r) <= 1e-8);
      CHECK(std::abs(grid.at(grid.psi_theta, ir, jt)) < 1e-8);
    }
  }
  CHECK(near > 0);  // the collar band is marked
}

TEST_CASE("contour extraction localizes level curves of the disk profile") {
  PatchCoeffs c{3, std::vector<double>(8, 0.0)};
  const GridTrace tr = synthesize(c, 256);
  const double om = 0.3;
  const FieldGrid grid = sample_field(tr, om, 48, 16, 2.0);

  // Psi(r) = -0.036 is attained at one interior and one exterior radius;
  // locate both on the closed-form profile by bisection.
  const double level = -0.036;
  auto profile = [&](double r) {
    return r < 1.0 ? (r * r - 1.0) * (1.0 - 2.0 * om) / 4.0
                   : 0.5 * std::log(r) - om * (r * r - 1.0) / 2.0;
  };
  auto bisect = [&](double lo, double hi) {
    for (int it = 0; it < 80; ++it) {
      const double mid_r = 0.5 * (lo + hi);
      ((profile(mid_r) - level) * (profile(lo) - level) <= 0.0 ? hi : lo) =
          mid_r;
    }
    return 0.5 * (lo + hi);
  };
  const double r_in = bisect(1e-6, 1.0);
  const double r_out = bisect(1.3, 2.0);

  const auto lines = contour_extract(grid, level);
  REQUIRE_FALSE(lines.empty());
  int npts = 0;
  for (const auto& line : lines) {
    for (const auto& [r, theta] : line.points) {
      ++npts;
      const double d = std::min(std::abs(r - r_in), std::abs(r - r_out));
      CHECK(d < 0.02);
      CHECK(theta >= -1e-12);
      CHECK(theta <= kPi / 3.0 + 1e-12);
    }
  }
  CHECK(npts > 10);
}
