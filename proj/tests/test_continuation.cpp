#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "vstates/continuation.hpp"
#include "vstates/solver.hpp"

using namespace vstates;

namespace {

BranchConfig mini_config() {
  BranchConfig cfg;
  cfg.m = 3;
  cfg.modes = 32;
  cfg.grid = 512;
  cfg.delta = 0.01;
  cfg.max_steps = 3;
  return cfg;
}

bool records_equal(const SolutionRecord& a, const SolutionRecord& b) {
  if (a.step != b.step || a.omega != b.omega) return false;
  if (a.coeffs.a.size() != b.coeffs.a.size()) return false;
  for (std::size_t i = 0; i < a.coeffs.a.size(); ++i)
    if (a.coeffs.a[i] != b.coeffs.a[i]) return false;
  return a.tail_ratio == b.tail_ratio &&
         a.metrics.maxPhi == b.metrics.maxPhi &&
         a.metrics.minPsiR == b.metrics.minPsiR;
}

}  // namespace

TEST_CASE("initial_guess seeds the branch and extrapolates along it") {
  // fresh start: (sqrt(delta), 0, ...)
  const PatchCoeffs g0 = initial_guess(3, 8, 0.001, nullptr, nullptr, 0.0,
                                       false);
  CHECK(g0.a[0] == doctest::Approx(0.0316227766016838).epsilon(1e-14));
  for (int i = 1; i < 8; ++i) CHECK(g0.a[i] == 0.0);

  SolutionRecord r1;
  r1.omega = 0.32;
  r1.coeffs = PatchCoeffs{3, {0.10, 0.01}};
  SolutionRecord r2;
  r2.omega = 0.31;
  r2.coeffs = PatchCoeffs{3, {0.14, 0.02}};

  // plain continuation: copy of the previous solution
  const PatchCoeffs gc =
      initial_guess(3, 2, 0.01, &r2, &r1, 0.30, false);
  CHECK(gc.a[0] == 0.14);
  CHECK(gc.a[1] == 0.02);

  // secant: linear extrapolation through the last two records
  const PatchCoeffs gs = initial_guess(3, 2, 0.01, &r2, &r1, 0.30, true);
  CHECK(gs.a[0] == doctest::Approx(0.18).epsilon(1e-12));
  CHECK(gs.a[1] == doctest::Approx(0.03).epsilon(1e-12));
}

TEST_CASE("tail_ratio compares the trailing window to the global maximum") {
  PatchCoeffs decaying{3, std::vector<double>(64, 0.0)};
  for (int n = 0; n < 64; ++n) decaying.a[n] = std::pow(2.0, -(n + 1));
  // top ceil(0.05*64) = 4 indices: max 2^-61; global max 2^-1
  CHECK(tail_ratio(decaying, 0.05) ==
        doctest::Approx(std::pow(2.0, -60)).epsilon(1e-12));

  PatchCoeffs flat{3, std::vector<double>(64, 0.25)};
  CHECK(tail_ratio(flat, 0.05) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("a small branch walks down in omega with growing amplitude") {
  const BranchConfig cfg = mini_config();
  std::vector<int> sunk_steps;
  RecordSink sink = [&](const SolutionRecord& r) {
    sunk_steps.push_back(r.step);
  };
  const BranchSummary s = trace_branch(cfg, sink);
  REQUIRE(s.records.size() == 5);  // two onset extras + three ladder steps
  CHECK(s.termination == Termination::StepBudget);

  const double om3 = critical_omega(3);
  const double want_omega[5] = {om3 - 0.0025, om3 - 0.005, om3 - 0.01,
                                om3 - 0.02, om3 - 0.03};
  for (int i = 0; i < 5; ++i) {
    CHECK(s.records[i].step == i);
    CHECK(s.records[i].omega == doctest::Approx(want_omega[i]).epsilon(1e-14));
    CHECK(s.records[i].newton.converged);
    CHECK(s.records[i].tail_ratio < cfg.tail_threshold);
  }
  for (int i = 1; i < 5; ++i) {
    CHECK(s.records[i].omega < s.records[i - 1].omega);
    CHECK(s.records[i].coeffs.a[0] > s.records[i - 1].coeffs.a[0]);
    CHECK(s.records[i].metrics.maxPhi > s.records[i - 1].metrics.maxPhi);
    CHECK(s.records[i].metrics.minPsiR < s.records[i - 1].metrics.minPsiR);
  }
  CHECK(sunk_steps == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("resuming mid-branch reproduces the uninterrupted run bit for bit") {
  const BranchConfig cfg = mini_config();
  const BranchSummary full = trace_branch(cfg);
  REQUIRE(full.records.size() == 5);

  const std::vector<SolutionRecord> head(full.records.begin(),
                                         full.records.begin() + 2);
  const BranchSummary resumed = trace_branch(cfg, nullptr, nullptr, head);
  REQUIRE(resumed.records.size() == full.records.size());
  for (std::size_t i = 0; i < full.records.size(); ++i)
    CHECK(records_equal(resumed.records[i], full.records[i]));
  CHECK(resumed.termination == full.termination);
}

TEST_CASE("secant predictor changes cost, not the records") {
  BranchConfig cfg = mini_config();
  const BranchSummary plain = trace_branch(cfg);
  cfg.use_secant = true;
  const BranchSummary secant = trace_branch(cfg);
  REQUIRE(plain.records.size() == secant.records.size());
  for (std::size_t i = 0; i < plain.records.size(); ++i) {
    // same solutions to Newton tolerance (not bit-identical: different paths)
    CHECK(std::abs(plain.records[i].coeffs.a[0] -
                   secant.records[i].coeffs.a[0]) < 1e-9);
    CHECK(plain.records[i].omega == secant.records[i].omega);
  }
}

TEST_CASE("an unreachable tail threshold stops the branch immediately") {
  BranchConfig cfg = mini_config();
  cfg.tail_threshold = 1e-30;  // no double-precision solve can satisfy this
  const BranchSummary s = trace_branch(cfg);
  CHECK(s.records.empty());
  CHECK(s.termination == Termination::ResolutionLoss);
  CHECK_FALSE(s.termination_detail.empty());
}

TEST_CASE("termination descriptions name the cause") {
  CHECK(std::strcmp(to_string(Termination::NewtonBudget), "NewtonBudget") == 0);
  CHECK(std::strcmp(to_string(Termination::ResolutionLoss),
                    "ResolutionLoss") == 0);
  CHECK(std::strcmp(to_string(Termination::StepBudget), "StepBudget") == 0);
  CHECK(std::strcmp(to_string(Termination::EvaluationFailure),
                    "EvaluationFailure") == 0);
}
