#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "vstates/continuation.hpp"
#include "vstates/solver.hpp"
#include "vstates/spectral.hpp"
#include "vstates/verify.hpp"

using namespace vstates;

namespace {

std::string failures_of(const AuditReport& report) {
  std::string out;
  for (const auto& e : report.entries) {
    if (!e.pass) {
      out += e.name + " (measured " + std::to_string(e.measured) + " vs " +
             std::to_string(e.tolerance) + "; " + e.detail + ") ";
    }
  }
  return out;
}

// Converged three-fold patch two continuation steps below onset.
struct Solved {
  PatchCoeffs coeffs{3, std::vector<double>(32, 0.0)};
  double omega = critical_omega(3) - 0.02;
  GridTrace trace;
  Solved() {
    NewtonConfig cfg;
    coeffs.a[0] = std::sqrt(0.01);
    const double om3 = critical_omega(3);
    REQUIRE(newton_solve(coeffs, om3 - 0.01, 512, cfg).converged);
    REQUIRE(newton_solve(coeffs, om3 - 0.02, 512, cfg).converged);
    trace = synthesize(coeffs, 512);
  }
};

const Solved& solved() {
  static Solved s;
  return s;
}

}  // namespace

TEST_CASE("audit report bookkeeping") {
  AuditReport r;
  CHECK(r.all_pass());  // vacuously
  r.add({"a", true, 1.0, 2.0, ""});
  CHECK(r.all_pass());
  AuditReport other;
  other.add({"b", false, 3.0, 2.0, "too big"});
  r.merge(other);
  CHECK_FALSE(r.all_pass());
  REQUIRE(r.entries.size() == 2);
  CHECK(r.entries[1].name == "b");
}

TEST_CASE("linearization audit at the trivial state") {
  const auto report = check_linearization(3, 0.25, 8, 128);
  CAPTURE(failures_of(report));
  CHECK(report.all_pass());
  CHECK_FALSE(report.entries.empty());
}

TEST_CASE("boundary-derivative expansions audit at small amplitude") {
  for (int m : {3, 4}) {
    const auto report = check_expansions_psi(m, 16, 256);
    CAPTURE(m);
    CAPTURE(failures_of(report));
    CHECK(report.all_pass());
  }
}

TEST_CASE("record-wise audits pass on a converged patch") {
  const auto& s = solved();
  for (const AuditReport& report :
       {check_bounds(s.trace, s.omega), check_nodal(s.trace, s.omega),
        check_rh_identity(s.trace, s.omega)}) {
    CAPTURE(failures_of(report));
    CHECK(report.all_pass());
    CHECK_FALSE(report.entries.empty());
  }
}

TEST_CASE("phase reconstruction flags a wrong rotation number") {
  const auto& s = solved();
  const auto report = check_rh_identity(s.trace, s.omega + 0.02);
  CHECK_FALSE(report.all_pass());
  double worst = 0.0;
  for (const auto& e : report.entries) {
    if (!e.pass) worst = std::max(worst, e.measured);
  }
  CHECK(worst >= 1e-4);
}

TEST_CASE("geometry audit flags a rotation number out of range") {
  const auto& s = solved();
  const auto report = check_bounds(s.trace, 0.6);
  CHECK_FALSE(report.all_pass());
}

TEST_CASE("local-curve audit accepts synthetic on-curve data") {
  const double om_m = critical_omega(3);
  std::vector<SolutionRecord> records;
  int step = 0;
  for (double a1 = 0.02; a1 < 0.095; a1 += 0.01) {
    SolutionRecord rec;
    rec.step = step++;
    rec.omega = om_m - a1 * a1;
    rec.coeffs.m = 3;
    rec.coeffs.a = {a1, 0.3 * a1 * a1, 0.0, 0.0};
    records.push_back(rec);
  }
  const auto report = check_local_curve(records, 3);
  CAPTURE(failures_of(report));
  CHECK(report.all_pass());

  bool saw_slope = false;
  for (const auto& e : report.entries) {
    if (e.name.find("mode2_order") != std::string::npos) {
      saw_slope = true;
      CHECK(e.measured >= 1.8);
      CHECK(e.measured == doctest::Approx(2.0).epsilon(0.05));
    }
  }
  CHECK(saw_slope);
}

TEST_CASE("local-curve audit skips when no records are near onset") {
  const double om_m = critical_omega(3);
  std::vector<SolutionRecord> records;
  int step = 0;
  for (double a1 : {0.2, 0.3, 0.4, 0.5}) {
    SolutionRecord rec;
    rec.step = step++;
    rec.omega = om_m - a1 * a1;
    rec.coeffs.m = 3;
    rec.coeffs.a = {a1, 0.3 * a1 * a1};
    records.push_back(rec);
  }
  const auto report = check_local_curve(records, 3);
  CHECK(report.all_pass());
  REQUIRE_FALSE(report.entries.empty());
  CHECK(report.entries.front().detail.find("skipped") != std::string::npos);
}

TEST_CASE("branch-level audit over a short continuation run") {
  BranchConfig cfg;
  cfg.m = 3;
  cfg.modes = 32;
  cfg.grid = 512;
  cfg.delta = 0.01;
  cfg.max_steps = 2;
  std::vector<SolutionRecord> records;
  trace_branch(cfg, [&](const SolutionRecord& r) { records.push_back(r); });
  REQUIRE(records.size() == 4);

  const auto report = run_audit(records, cfg, 1);
  CAPTURE(failures_of(report));
  CHECK(report.all_pass());
  // every=2 subsamples the record-wise checks but keeps the branch-level one
  const auto thin = run_audit(records, cfg, 2);
  CHECK(thin.all_pass());
  CHECK(thin.entries.size() < report.entries.size());
}
