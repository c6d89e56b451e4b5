// Internal: Neumaier-compensated accumulator for complex sums. Callers fix
// the summation order (ascending index), so results are bit-reproducible for
// any thread count.

#pragma once

#include <cmath>
#include <complex>

namespace vstates::detail {

struct CompensatedSum {
  double sr = 0.0, si = 0.0;  // running sums
  double cr = 0.0, ci = 0.0;  // running compensation

  void add(const std::complex<double>& v) {
    const double xr = v.real(), xi = v.imag();
    const double tr = sr + xr;
    cr += (std::abs(sr) >= std::abs(xr)) ? (sr - tr) + xr : (xr - tr) + sr;
    sr = tr;
    const double ti = si + xi;
    ci += (std::abs(si) >= std::abs(xi)) ? (si - ti) + xi : (xi - ti) + si;
    si = ti;
  }

  std::complex<double> value() const { return {sr + cr, si + ci}; }
};

}  // namespace vstates::detail
