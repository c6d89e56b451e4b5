// vstates -- spectral representation of m-fold symmetric patch boundaries.
//
// A patch boundary is the image of the unit circle under the conformal trace
//
//   phi(w) = w + sum_{n=1}^{M} a_n w^{-(n m - 1)},   w = e^{it},
//
// with real coefficients a_n. Real coefficients encode reflection symmetry
// (phi(conj w) = conj phi(w)); restricting the exponents to frequencies
// congruent to 1 mod m encodes m-fold rotation symmetry
// (phi(e^{2 pi i/m} w) = e^{2 pi i/m} phi(w)).

#pragma once

#include <complex>
#include <vector>

namespace vstates {

/// Real coefficient vector a_1..a_M of an m-fold symmetric trace.
struct PatchCoeffs {
  int m = 0;               ///< symmetry order, >= 2
  std::vector<double> a;   ///< a[n-1] multiplies w^{-(n m - 1)}

  int modes() const { return static_cast<int>(a.size()); }
};

/// phi and phi' sampled on the uniform grid t_j = 2 pi j / N.
struct GridTrace {
  int m = 0;
  int N = 0;
  std::vector<std::complex<double>> tau;   ///< e^{i t_j}
  std::vector<std::complex<double>> phi;   ///< phi(e^{i t_j})
  std::vector<std::complex<double>> dphi;  ///< phi'(e^{i t_j})
};

/// Sine-series coefficients of a residual sample vector: the projection of the
/// samples onto sum_n b_n sin(n m t), plus a diagnostic for energy at
/// frequencies outside that symmetric band (aliasing / broken symmetry).
struct ResidualCoeffs {
  std::vector<double> b;
  double offband_ratio = 0.0;  ///< off-band energy / total energy (0 if total ~ 0)
};

/// Smallest power of two >= 4*m*modes; comfortable default quadrature size.
int default_grid_size(int m, int modes);

/// Evaluate the trace and its derivative on the N-point uniform grid via an
/// inverse FFT of the padded coefficient spectrum. Requires N > m*modes so
/// every represented frequency has a distinct slot.
GridTrace synthesize(const PatchCoeffs& coeffs, int N);

/// Project real samples of a residual onto the first `modes` sine coefficients
/// b_n of frequency n*m, and report the off-band energy fraction.
ResidualCoeffs analyze_residual(const std::vector<double>& samples, int m,
                                int modes);

/// Orthogonal projection of complex boundary samples onto the symmetric class:
/// frequencies congruent to 1 mod m with real coefficients. Equals the
/// 2m-element symmetry-orbit average and is idempotent.
std::vector<std::complex<double>> project_symmetry(
    const std::vector<std::complex<double>>& samples, int m);

/// Recover coefficients from a sampled trace (least-squares = DFT projection
/// on the uniform grid). Exact up to round-off when the trace is band-limited
/// and N is large enough that no represented frequency aliases.
PatchCoeffs recover_coeffs(const GridTrace& trace, int modes);

}  // namespace vstates
