// vstates -- fixed-normalization FFT wrapper.
//
// All spectral transforms in the library go through these two routines so the
// normalization convention lives in exactly one place:
//
//   forward:  X_k = sum_j x_j e^{-2 pi i jk/N}        (unscaled)
//   inverse:  x_j = (1/N) sum_k X_k e^{+2 pi i jk/N}
//
// Backed by FFTW3 with FFTW_ESTIMATE plans (deterministic plan selection, and
// hence bit-reproducible output for a given input on a given machine). Any
// transform length >= 1 is supported, including the mixed-radix production
// grid sizes.

#pragma once

#include <complex>
#include <vector>

namespace vstates::fft {

using cvec = std::vector<std::complex<double>>;

/// Unscaled forward DFT.
cvec forward(const cvec& x);

/// Inverse DFT carrying the 1/N factor; inverse(forward(x)) == x up to
/// round-off.
cvec inverse(const cvec& X);

/// Synthesis helper: g_j = sum_k S_k e^{+2 pi i jk/N} for O(1)-sized spectral
/// coefficients S (i.e. the unscaled backward transform).
cvec spectrum_to_grid(const cvec& S);

/// Spectral derivative d/dt of samples of a smooth 2*pi-periodic function on
/// the uniform grid t_j = 2 pi j / N. The Nyquist mode (even N) is zeroed,
/// the standard symmetric choice.
cvec derivative_t(const cvec& g);

/// Trigonometric interpolant of uniform-grid samples, evaluated at arbitrary
/// t. Spectrally accurate for smooth periodic data; used to evaluate boundary
/// quantities at off-grid angles (e.g. the symmetry rays when 2m does not
/// divide N).
class TrigInterp {
 public:
  TrigInterp() = default;  ///< empty interpolant, evaluates to 0
  explicit TrigInterp(const cvec& samples);
  explicit TrigInterp(const std::vector<double>& samples);

  std::complex<double> eval(double t) const;
  double eval_real(double t) const { return eval(t).real(); }
  std::complex<double> derivative(double t) const;  ///< d/dt of the interpolant

  int size() const { return n_; }

 private:
  int n_ = 0;
  cvec spec_;  // forward DFT of the samples, scaled by 1/N
};

}  // namespace vstates::fft
