#include "vstates/continuation.hpp"

#include <cmath>
#include <sstream>

#include "vstates/errors.hpp"

namespace vstates {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::NewtonBudget: return "NewtonBudget";
    case Termination::ResolutionLoss: return "ResolutionLoss";
    case Termination::StepBudget: return "StepBudget";
    case Termination::EvaluationFailure: return "EvaluationFailure";
  }
  return "Unknown";
}

PatchCoeffs initial_guess(int m, int modes, double delta_eff,
                          const SolutionRecord* prev,
                          const SolutionRecord* prev2, double omega_next,
                          bool use_secant) {
  if (prev == nullptr) {
    PatchCoeffs guess;
    guess.m = m;
    guess.a.assign(static_cast<std::size_t>(modes), 0.0);
    guess.a[0] = std::sqrt(delta_eff);
    return guess;
  }
  if (use_secant && prev2 != nullptr && prev->omega != prev2->omega) {
    PatchCoeffs guess = prev->coeffs;
    const double t =
        (omega_next - prev->omega) / (prev->omega - prev2->omega);
    for (std::size_t i = 0; i < guess.a.size(); ++i) {
      guess.a[i] += t * (prev->coeffs.a[i] - prev2->coeffs.a[i]);
    }
    return guess;
  }
  return prev->coeffs;
}

double tail_ratio(const PatchCoeffs& coeffs, double window) {
  const std::size_t modes = coeffs.a.size();
  if (modes == 0) return 0.0;
  std::size_t tail_count = static_cast<std::size_t>(
      std::ceil(window * static_cast<double>(modes)));
  if (tail_count == 0) tail_count = 1;
  double max_all = 0.0, max_tail = 0.0;
  for (std::size_t i = 0; i < modes; ++i) {
    const double mag = std::abs(coeffs.a[i]);
    max_all = std::max(max_all, mag);
    if (i >= modes - tail_count) max_tail = std::max(max_tail, mag);
  }
  return max_all > 0.0 ? max_tail / max_all : 0.0;
}

BranchSummary trace_branch(const BranchConfig& config, const RecordSink& sink,
                           const RecordDecorator& decorator,
                           const std::vector<SolutionRecord>& resume_from) {
  const double omega_m = critical_omega(config.m);
  const int N = config.grid > 0 ? config.grid
                                : default_grid_size(config.m, config.modes);

  // Full schedule of target rotation numbers: a few refinement points close
  // to the bifurcation (delta/4, delta/2 for the default two), then the
  // uniform ladder Omega_m - k delta.
  std::vector<double> schedule;
  for (int j = config.extra_start_points; j >= 1; --j) {
    schedule.push_back(omega_m - config.delta / std::pow(2.0, j));
  }
  for (int k = 1; k <= config.max_steps; ++k) {
    schedule.push_back(omega_m - k * config.delta);
  }

  BranchSummary summary;
  summary.records = resume_from;
  summary.termination = Termination::StepBudget;

  for (std::size_t idx = summary.records.size(); idx < schedule.size();
       ++idx) {
    const double omega = schedule[idx];
    const SolutionRecord* prev =
        summary.records.empty() ? nullptr : &summary.records.back();
    const SolutionRecord* prev2 = summary.records.size() >= 2
                                      ? &summary.records[summary.records.size() - 2]
                                      : nullptr;
    PatchCoeffs coeffs =
        initial_guess(config.m, config.modes, omega_m - omega, prev, prev2,
                      omega, config.use_secant);

    NewtonReport report;
    try {
      report = newton_solve(coeffs, omega, N, config.newton);
    } catch (const NumericalError& err) {
      summary.termination = Termination::EvaluationFailure;
      std::ostringstream os;
      os << "residual evaluation failed at omega = " << omega << ": "
         << err.what();
      summary.termination_detail = os.str();
      return summary;
    }
    if (!report.converged) {
      summary.termination = Termination::NewtonBudget;
      std::ostringstream os;
      os << "Newton did not converge at omega = " << omega
         << " (final residual " << report.final_residual << " after "
         << report.iterations << " iterations)";
      summary.termination_detail = os.str();
      return summary;
    }

    const double tratio = tail_ratio(coeffs, config.tail_window);
    if (tratio > config.tail_threshold) {
      // The converged iterate is no longer trustworthy at this truncation;
      // stop without emitting it.
      summary.termination = Termination::ResolutionLoss;
      std::ostringstream os;
      os << "coefficient tail ratio " << tratio << " exceeds "
         << config.tail_threshold << " at omega = " << omega
         << "; solution not resolved by " << config.modes
         << " modes (record dropped)";
      summary.termination_detail = os.str();
      return summary;
    }

    SolutionRecord rec;
    rec.step = static_cast<int>(summary.records.size());
    rec.omega = omega;
    rec.coeffs = std::move(coeffs);
    rec.newton = report;
    rec.tail_ratio = tratio;
    const GridTrace trace = synthesize(rec.coeffs, N);
    rec.metrics = health_metrics(trace, omega);
    if (config.compute_saddle && decorator) {
      rec.saddle = decorator(trace, omega);
    }
    summary.records.push_back(std::move(rec));
    if (sink) sink(summary.records.back());
  }
  return summary;
}

}  // namespace vstates
