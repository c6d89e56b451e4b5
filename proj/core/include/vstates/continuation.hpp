// vstates -- branch continuation in the rotation number.
//
// Starting from the bifurcation point Omega_m of the disk, the branch is
// traced by stepping Omega downward (Omega^k = Omega_m - k delta) and solving
// at each step with the previous solution as the initial guess. The branch is
// a graph over Omega in the computed regime, so no fold handling is needed.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vstates/boundary.hpp"
#include "vstates/solver.hpp"
#include "vstates/spectral.hpp"

namespace vstates {

/// Why a branch trace stopped.
enum class Termination {
  NewtonBudget,       ///< a step's Newton solve failed to converge
  ResolutionLoss,     ///< coefficient tail stopped decaying at this M
  StepBudget,         ///< max_steps reached
  EvaluationFailure,  ///< a residual evaluation threw
};

const char* to_string(Termination t);

struct BranchConfig {
  int m = 3;
  int modes = 64;            ///< M
  int grid = 0;              ///< N; 0 -> default_grid_size(m, modes)
  double delta = 0.005;      ///< Omega step
  int max_steps = 40;
  int extra_start_points = 2;  ///< extra solves at delta/4, delta/2 before step 1
  double tail_threshold = 1e-6;
  double tail_window = 0.05;   ///< top fraction of indices in the tail ratio
  bool use_secant = false;     ///< secant extrapolation of initial guesses
  bool compute_saddle = true;  ///< fill SaddleInfo via the decorator, if wired
  NewtonConfig newton;
};

/// Compact critical-point summary carried in a branch record. Populated by an
/// injected decorator (the field module) so the continuation layer stays
/// independent of field evaluation.
struct SaddleInfo {
  double r = 0.0;                     ///< radius of the saddle on the theta=0 ray
  double theta = 0.0;
  double hessian_det = 0.0;
  double psi_value = 0.0;
  double distance_to_boundary = 0.0;  ///< r - R(0)
  bool degenerate = false;
};

struct SolutionRecord {
  int step = 0;            ///< running record index (0-based)
  double omega = 0.0;
  PatchCoeffs coeffs;
  HealthMetrics metrics{};
  NewtonReport newton{};
  double tail_ratio = 0.0;
  std::optional<SaddleInfo> saddle;
};

struct BranchSummary {
  std::vector<SolutionRecord> records;
  Termination termination = Termination::StepBudget;
  std::string termination_detail;
};

/// Initial guess for the solve at the next Omega. With no previous record the
/// guess is (sqrt(delta_eff), 0, ...); afterwards it is the previous solution,
/// or a secant extrapolation through the last two when enabled.
PatchCoeffs initial_guess(int m, int modes, double delta_eff,
                          const SolutionRecord* prev,
                          const SolutionRecord* prev2, double omega_next,
                          bool use_secant);

/// max |a_n| over the trailing `window` fraction of indices divided by
/// max |a_n| overall. Requires at least 20 modes to be meaningful.
double tail_ratio(const PatchCoeffs& coeffs, double window);

using RecordSink = std::function<void(const SolutionRecord&)>;
using RecordDecorator = std::function<std::optional<SaddleInfo>(
    const GridTrace&, double omega)>;

/// Trace the branch. Every converged, resolution-clean record is passed to
/// `sink` as soon as it exists (checkpointing hook). `decorator`, if set, is
/// invoked per record to attach the saddle summary. `resume_from` allows
/// restarting: pass the already-known records; tracing continues after them
/// bit-identically to an uninterrupted run.
BranchSummary trace_branch(const BranchConfig& config,
                           const RecordSink& sink = nullptr,
                           const RecordDecorator& decorator = nullptr,
                           const std::vector<SolutionRecord>& resume_from = {});

}  // namespace vstates
