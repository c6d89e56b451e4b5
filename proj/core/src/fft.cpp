#include "vstates/fft.hpp"

#include <fftw3.h>

#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>

namespace vstates::fft {
namespace {

// FFTW's planner is not thread-safe; plan creation is serialized and plans are
// cached per transform length. Execution through the new-array interface is
// safe concurrently. FFTW_ESTIMATE keeps planning deterministic (no runtime
// measurement), FFTW_UNALIGNED lets plans run on ordinary vector storage.
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::mutex g_planner_mutex;
std::map<int, PlanPair>& plan_cache() {
  static std::map<int, PlanPair> cache;
  return cache;
}

const PlanPair& plans_for(int n) {
  std::lock_guard<std::mutex> lock(g_planner_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  fftw_complex* in = fftw_alloc_complex(static_cast<std::size_t>(n));
  fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(n));
  PlanPair p;
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p.fwd = fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, flags);
  p.bwd = fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, flags);
  fftw_free(in);
  fftw_free(out);
  if (!p.fwd || !p.bwd) throw std::runtime_error("fft: planning failed");
  return cache.emplace(n, p).first->second;
}

cvec execute(const cvec& x, bool forward_dir) {
  const int n = static_cast<int>(x.size());
  if (n == 0) return {};
  if (n == 1) return x;
  const PlanPair& p = plans_for(n);
  cvec y(x.size());
  // std::complex<double> is layout-compatible with fftw_complex.
  auto* in = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(x.data()));
  auto* out = reinterpret_cast<fftw_complex*>(y.data());
  fftw_execute_dft(forward_dir ? p.fwd : p.bwd, in, out);
  return y;
}

}  // namespace

cvec forward(const cvec& x) { return execute(x, true); }

cvec spectrum_to_grid(const cvec& S) { return execute(S, false); }

cvec inverse(const cvec& X) {
  cvec y = execute(X, false);
  const double scale = y.empty() ? 1.0 : 1.0 / static_cast<double>(y.size());
  for (auto& v : y) v *= scale;
  return y;
}

cvec derivative_t(const cvec& g) {
  const int n = static_cast<int>(g.size());
  if (n == 0) return {};
  cvec spec = forward(g);
  for (int k = 0; k < n; ++k) {
    // Signed frequency; zero the Nyquist mode for even n.
    int ks = (2 * k < n) ? k : k - n;
    if (2 * k == n) ks = 0;
    spec[k] *= std::complex<double>(0.0, static_cast<double>(ks));
  }
  return inverse(spec);
}

TrigInterp::TrigInterp(const cvec& samples) : n_(static_cast<int>(samples.size())) {
  spec_ = forward(samples);
  const double scale = n_ > 0 ? 1.0 / static_cast<double>(n_) : 1.0;
  for (auto& c : spec_) c *= scale;
}

TrigInterp::TrigInterp(const std::vector<double>& samples)
    : TrigInterp(cvec(samples.begin(), samples.end())) {}

std::complex<double> TrigInterp::eval(double t) const {
  // Sum c_k e^{i ks t} over signed frequencies; split the Nyquist weight
  // between +N/2 and -N/2 so real input stays real.
  std::complex<double> acc{0.0, 0.0};
  const std::complex<double> ei(std::cos(t), std::sin(t));
  std::complex<double> pos{1.0, 0.0};  // e^{i k t}, k ascending from 0
  for (int k = 0; k <= n_ / 2; ++k) {
    if (k == 0) {
      acc += spec_[0];
    } else if (2 * k == n_) {
      acc += spec_[k] * std::complex<double>(std::cos(k * t), 0.0);
    } else {
      acc += spec_[k] * pos + spec_[n_ - k] * std::conj(pos);
    }
    pos *= ei;
  }
  return acc;
}

std::complex<double> TrigInterp::derivative(double t) const {
  std::complex<double> acc{0.0, 0.0};
  const std::complex<double> ei(std::cos(t), std::sin(t));
  std::complex<double> pos{1.0, 0.0};
  for (int k = 0; k <= n_ / 2; ++k) {
    if (k > 0 && 2 * k != n_) {
      const std::complex<double> ik(0.0, static_cast<double>(k));
      acc += spec_[k] * ik * pos - spec_[n_ - k] * ik * std::conj(pos);
    } else if (k > 0) {
      // Nyquist term c_{N/2} cos(kt) differentiates to -c_{N/2} k sin(kt).
      acc -= spec_[k] * (static_cast<double>(k) * std::sin(k * t));
    }
    pos *= ei;
  }
  return acc;
}

}  // namespace vstates::fft
