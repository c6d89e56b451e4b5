// vstates -- microbenchmarks for the hot paths: the Cauchy operator (the
// O(N^2) kernel behind everything), residual assembly, spectral transforms,
// one matrix-free Newton step, and field evaluation off the boundary.

#include <complex>
#include <vector>

#include <benchmark/benchmark.h>

#include "vstates/boundary.hpp"
#include "vstates/field.hpp"
#include "vstates/solver.hpp"
#include "vstates/spectral.hpp"

using namespace vstates;

namespace {

PatchCoeffs wavy_coeffs(int modes) {
  PatchCoeffs c{3, std::vector<double>(modes, 0.0)};
  c.a[0] = 0.15;
  if (modes > 1) c.a[1] = 0.01;
  if (modes > 2) c.a[2] = 0.001;
  return c;
}

void bm_cauchy_apply(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const GridTrace trace = synthesize(wavy_coeffs(8), N);
  cvec g(trace.phi.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = std::conj(trace.phi[j]);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cauchy_apply(trace, g));
  }
  state.SetComplexityN(N);
}
BENCHMARK(bm_cauchy_apply)->Arg(256)->Arg(1024)->Arg(4096)->Complexity();

void bm_residual(benchmark::State& state) {
  const GridTrace trace = synthesize(wavy_coeffs(64), 1024);
  for (auto _ : state) {
    benchmark::DoNotOptimize(residual(trace, 0.31));
  }
}
BENCHMARK(bm_residual);

void bm_synthesize(benchmark::State& state) {
  const PatchCoeffs c = wavy_coeffs(64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(synthesize(c, 1024));
  }
}
BENCHMARK(bm_synthesize);

void bm_analyze_residual(benchmark::State& state) {
  const GridTrace trace = synthesize(wavy_coeffs(64), 1024);
  const rvec F = residual(trace, 0.31);
  for (auto _ : state) {
    benchmark::DoNotOptimize(analyze_residual(F, 3, 64));
  }
}
BENCHMARK(bm_analyze_residual);

void bm_projected_residual(benchmark::State& state) {
  const PatchCoeffs c = wavy_coeffs(64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_FM(c, 0.31, 1024));
  }
}
BENCHMARK(bm_projected_residual);

void bm_newton_step(benchmark::State& state) {
  // One full Newton solve from a warm start: the per-step cost of branch
  // continuation.
  const double om = critical_omega(3) - 0.02;
  PatchCoeffs warm{3, std::vector<double>(64, 0.0)};
  warm.a[0] = 0.14;
  NewtonConfig cfg;
  newton_solve(warm, om, 1024, cfg);  // converge once outside the loop
  for (auto _ : state) {
    PatchCoeffs c = warm;
    benchmark::DoNotOptimize(newton_solve(c, om, 1024, cfg));
  }
}
BENCHMARK(bm_newton_step)->Unit(benchmark::kMillisecond);

void bm_trace_field_build(benchmark::State& state) {
  const GridTrace trace = synthesize(wavy_coeffs(64), 1024);
  for (auto _ : state) {
    benchmark::DoNotOptimize(TraceField(trace, 0.31));
  }
}
BENCHMARK(bm_trace_field_build)->Unit(benchmark::kMillisecond);

void bm_field_dzpsi(benchmark::State& state) {
  const GridTrace trace = synthesize(wavy_coeffs(64), 1024);
  const TraceField field(trace, 0.31);
  const std::complex<double> z(1.9, 0.7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(field.dzPsi(z));
  }
}
BENCHMARK(bm_field_dzpsi);

void bm_field_psi(benchmark::State& state) {
  const GridTrace trace = synthesize(wavy_coeffs(64), 1024);
  const TraceField field(trace, 0.31);
  const std::complex<double> z(1.9, 0.7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(field.psi(z));
  }
}
BENCHMARK(bm_field_psi);

}  // namespace

BENCHMARK_MAIN();
