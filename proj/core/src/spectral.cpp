#include "vstates/spectral.hpp"

#include <cmath>
#include <stdexcept>

#include "vstates/errors.hpp"
#include "vstates/fft.hpp"

namespace vstates {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Slot of signed frequency k in an N-point spectrum.
int slot(int freq, int N) { return ((freq % N) + N) % N; }

}  // namespace

int default_grid_size(int m, int modes) {
  require(m >= 2 && modes >= 1, "default_grid_size: need m >= 2, modes >= 1");
  int n = 1;
  while (n < 4 * m * modes) n *= 2;
  return n;
}

GridTrace synthesize(const PatchCoeffs& coeffs, int N) {
  const int m = coeffs.m;
  const int M = coeffs.modes();
  require(m >= 2, "synthesize: symmetry order must be >= 2");
  require(N > m * M, "synthesize: grid must satisfy N > m*modes");

  // Pad the coefficient spectrum and evaluate by inverse FFT. The trace
  // occupies frequency +1 plus the negative frequencies -(n m - 1); the
  // derivative phi'(w) = 1 - sum (n m - 1) a_n w^{-n m} occupies 0 and -n m.
  fft::cvec spec_phi(static_cast<std::size_t>(N), 0.0);
  fft::cvec spec_dphi(static_cast<std::size_t>(N), 0.0);
  spec_phi[slot(1, N)] = 1.0;
  spec_dphi[slot(0, N)] = 1.0;
  for (int n = 1; n <= M; ++n) {
    const int p = n * m - 1;
    spec_phi[slot(-p, N)] += coeffs.a[n - 1];
    spec_dphi[slot(-(p + 1), N)] -= static_cast<double>(p) * coeffs.a[n - 1];
  }

  GridTrace trace;
  trace.m = m;
  trace.N = N;
  trace.phi = fft::spectrum_to_grid(spec_phi);
  trace.dphi = fft::spectrum_to_grid(spec_dphi);
  trace.tau.resize(static_cast<std::size_t>(N));
  const double h = 2.0 * M_PI / static_cast<double>(N);
  for (int j = 0; j < N; ++j) {
    const double t = h * j;
    trace.tau[j] = std::complex<double>(std::cos(t), std::sin(t));
  }
  return trace;
}

ResidualCoeffs analyze_residual(const std::vector<double>& samples, int m,
                                int modes) {
  const int N = static_cast<int>(samples.size());
  require(m >= 2 && modes >= 1, "analyze_residual: need m >= 2, modes >= 1");
  require(N > 2 * m * modes,
          "analyze_residual: grid too small to resolve the requested modes");

  fft::cvec grid(samples.begin(), samples.end());
  fft::cvec spec = fft::forward(grid);

  ResidualCoeffs out;
  out.b.resize(static_cast<std::size_t>(modes));
  double total = 0.0;
  for (const auto& c : spec) total += std::norm(c);

  // For real samples h = sum b_n sin(n m t), the slot at +n m holds
  // -i b_n N / 2; energy anywhere else (including the mean) is off-band.
  double inband = 0.0;
  for (int n = 1; n <= modes; ++n) {
    const int k = n * m;
    out.b[n - 1] = -2.0 * spec[slot(k, N)].imag() / static_cast<double>(N);
    inband += std::norm(spec[slot(k, N)]) + std::norm(spec[slot(-k, N)]);
  }
  out.offband_ratio = total > 0.0 ? std::max(0.0, (total - inband) / total) : 0.0;
  return out;
}

std::vector<std::complex<double>> project_symmetry(
    const std::vector<std::complex<double>>& samples, int m) {
  const int N = static_cast<int>(samples.size());
  require(m >= 2, "project_symmetry: symmetry order must be >= 2");
  require(N >= 2, "project_symmetry: need at least two samples");

  // Orbit-averaging over the 2m symmetries is, in coefficient space, the
  // orthogonal projection onto { frequencies = 1 mod m, real coefficients }.
  // Doing it spectrally avoids requiring m | N.
  fft::cvec spec = fft::forward(samples);
  for (int k = 0; k < N; ++k) {
    int ks = (2 * k < N) ? k : k - N;
    if (((ks % m) + m) % m != 1 % m) {
      spec[k] = 0.0;
    } else {
      spec[k] = std::complex<double>(spec[k].real(), 0.0);
    }
  }
  return fft::inverse(spec);
}

PatchCoeffs recover_coeffs(const GridTrace& trace, int modes) {
  const int N = trace.N;
  require(modes >= 1 && N > trace.m * modes, "recover_coeffs: bad sizes");
  fft::cvec f(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) f[j] = trace.phi[j] - trace.tau[j];
  fft::cvec spec = fft::forward(f);
  PatchCoeffs out;
  out.m = trace.m;
  out.a.resize(static_cast<std::size_t>(modes));
  for (int n = 1; n <= modes; ++n) {
    out.a[n - 1] =
        spec[slot(-(n * trace.m - 1), N)].real() / static_cast<double>(N);
  }
  return out;
}

}  // namespace vstates
