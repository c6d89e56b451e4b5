#include "vstates/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "vstates/boundary.hpp"
#include "vstates/errors.hpp"

namespace vstates {

namespace {

using dvec = std::vector<double>;

double norm_inf(const dvec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double norm_2(const dvec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const dvec& x, const dvec& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const dvec& x, dvec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

}  // namespace

double critical_omega(int n_times_m) {
  return (n_times_m - 1.0) / (2.0 * n_times_m);
}

double linearized_multiplier(int k, int m, double omega) {
  return k * m * (omega - critical_omega(k * m));
}

dvec eval_FM(const PatchCoeffs& coeffs, double omega, int N) {
  const GridTrace trace = synthesize(coeffs, N);
  const rvec samples = residual(trace, omega);
  return analyze_residual(samples, coeffs.m, coeffs.modes()).b;
}

dvec jacobian_vector(const PatchCoeffs& base, const dvec& base_residual,
                     const dvec& direction, double omega, int N,
                     double eps_scale) {
  const double dn = norm_2(direction);
  if (dn == 0.0) return dvec(base_residual.size(), 0.0);
  const double eps = eps_scale * (1.0 + norm_2(base.a)) / dn;
  PatchCoeffs shifted = base;
  for (std::size_t i = 0; i < shifted.a.size(); ++i) {
    shifted.a[i] += eps * direction[i];
  }
  dvec shifted_res = eval_FM(shifted, omega, N);
  const double inv_eps = 1.0 / eps;
  for (std::size_t i = 0; i < shifted_res.size(); ++i) {
    shifted_res[i] = (shifted_res[i] - base_residual[i]) * inv_eps;
  }
  return shifted_res;
}

// Flexible restarted GMRES: the subspace directions d_j may differ from the
// orthonormal Arnoldi vectors (right diagonal preconditioning, LGMRES-style
// augmentation with previous outer corrections), so the iterate is assembled
// from the stored d_j directly. With d_j = v_j this is textbook GMRES(m).
dvec gmres(const std::function<dvec(const dvec&)>& op, const dvec& rhs,
           double tol, int restart, int max_iters, int* iters_out,
           double* relres_out, const dvec* right_diag_precond,
           bool lgmres_augment, int lgmres_aug) {
  const std::size_t n = rhs.size();
  dvec x(n, 0.0);
  const double rhs_norm = norm_2(rhs);
  if (iters_out) *iters_out = 0;
  if (relres_out) *relres_out = 0.0;
  if (rhs_norm == 0.0) return x;
  const double target = tol * rhs_norm;

  dvec r = rhs;  // x = 0 initially
  double beta = rhs_norm;
  int total_iters = 0;
  std::deque<dvec> outer_corrections;  // normalized, newest first

  while (beta > target && total_iters < max_iters) {
    std::vector<dvec> v;  // Arnoldi basis
    std::vector<dvec> d;  // subspace directions the iterate is built from
    v.reserve(restart + 1);
    d.reserve(restart);
    v.push_back(r);
    for (auto& val : v[0]) val /= beta;

    std::vector<dvec> h;       // Hessenberg columns, h[j] has j+2 entries
    std::vector<double> cs, sn;  // Givens rotations
    dvec g(1, beta);           // rotated rhs of the least-squares system

    int j = 0;
    bool breakdown = false;
    while (j < restart && total_iters < max_iters) {
      // Pick the direction to expand with: previous outer corrections first
      // (LGMRES), otherwise the (optionally preconditioned) Arnoldi vector.
      dvec dir;
      if (lgmres_augment && j < static_cast<int>(outer_corrections.size())) {
        dir = outer_corrections[j];
      } else {
        dir = v[j];
      }
      if (right_diag_precond) {
        for (std::size_t i = 0; i < n; ++i) dir[i] *= (*right_diag_precond)[i];
      }
      dvec w = op(dir);
      d.push_back(std::move(dir));
      ++total_iters;

      // Modified Gram-Schmidt.
      dvec hcol(j + 2, 0.0);
      for (int i = 0; i <= j; ++i) {
        hcol[i] = dot(w, v[i]);
        axpy(-hcol[i], v[i], w);
      }
      hcol[j + 1] = norm_2(w);
      if (hcol[j + 1] > 1e-300) {
        dvec vnext = w;
        for (auto& val : vnext) val /= hcol[j + 1];
        v.push_back(std::move(vnext));
      } else {
        breakdown = true;  // happy breakdown: exact solve in this subspace
      }

      // Apply accumulated Givens rotations, then zero the subdiagonal.
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * hcol[i] + sn[i] * hcol[i + 1];
        hcol[i + 1] = -sn[i] * hcol[i] + cs[i] * hcol[i + 1];
        hcol[i] = t;
      }
      const double denom = std::hypot(hcol[j], hcol[j + 1]);
      const double c = denom > 0.0 ? hcol[j] / denom : 1.0;
      const double s = denom > 0.0 ? hcol[j + 1] / denom : 0.0;
      cs.push_back(c);
      sn.push_back(s);
      hcol[j] = denom;
      hcol[j + 1] = 0.0;
      h.push_back(std::move(hcol));
      g.push_back(-s * g[j]);
      g[j] = c * g[j];
      ++j;
      if (std::abs(g[j]) <= target || breakdown) break;
    }

    // Back-substitute H y = g and accumulate the correction in the d basis.
    dvec y(j, 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = g[i];
      for (int k = i + 1; k < j; ++k) s -= h[k][i] * y[k];
      y[i] = h[i][i] != 0.0 ? s / h[i][i] : 0.0;
    }
    dvec correction(n, 0.0);
    for (int i = 0; i < j; ++i) axpy(y[i], d[i], correction);
    axpy(1.0, correction, x);

    if (lgmres_augment) {
      const double cn = norm_2(correction);
      if (cn > 0.0) {
        for (auto& val : correction) val /= cn;
        outer_corrections.push_front(std::move(correction));
        while (static_cast<int>(outer_corrections.size()) > lgmres_aug) {
          outer_corrections.pop_back();
        }
      }
    }

    // True residual for the restart (cheap relative to the op evaluations).
    dvec ax = op(x);
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - ax[i];
    beta = norm_2(r);
    if (breakdown) break;
  }

  if (iters_out) *iters_out = total_iters;
  if (relres_out) *relres_out = beta / rhs_norm;
  return x;
}

NewtonReport newton_solve(PatchCoeffs& coeffs, double omega, int N,
                          const NewtonConfig& config) {
  NewtonReport report;
  const int modes = coeffs.modes();

  dvec residual_b = eval_FM(coeffs, omega, N);
  double res_norm = norm_inf(residual_b);
  report.initial_residual = res_norm;
  report.residual_history.push_back(res_norm);

  std::vector<double> precond;
  if (config.use_diag_preconditioner) {
    precond.resize(modes);
    for (int k = 1; k <= modes; ++k) {
      const double mult = linearized_multiplier(k, coeffs.m, omega);
      // Near a critical frequency the trivial linearization is singular in
      // this mode; leave it unscaled.
      precond[k - 1] = std::abs(mult) > 1e-8 ? 1.0 / mult : 1.0;
    }
  }

  for (int iter = 0; iter < config.max_iters && res_norm > config.tol_residual;
       ++iter) {
    const auto op = [&](const dvec& dir) {
      return jacobian_vector(coeffs, residual_b, dir, omega, N,
                             config.fd_epsilon_scale);
    };
    dvec rhs(modes);
    for (int i = 0; i < modes; ++i) rhs[i] = -residual_b[i];

    int krylov_iters = 0;
    double krylov_relres = 0.0;
    dvec delta =
        gmres(op, rhs, config.krylov_tol, config.krylov_restart,
              config.krylov_max_iters, &krylov_iters, &krylov_relres,
              config.use_diag_preconditioner ? &precond : nullptr,
              config.use_lgmres_augmentation, config.lgmres_aug);
    report.total_krylov_iters += krylov_iters;

    // Damped update: halve until the residual norm decreases at all.
    bool accepted = false;
    double lambda = 1.0;
    for (int bt = 0; bt <= config.max_backtracks; ++bt) {
      PatchCoeffs trial = coeffs;
      for (int i = 0; i < modes; ++i) trial.a[i] += lambda * delta[i];
      dvec trial_b = eval_FM(trial, omega, N);
      const double trial_norm = norm_inf(trial_b);
      if (trial_norm < res_norm) {
        coeffs = std::move(trial);
        residual_b = std::move(trial_b);
        res_norm = trial_norm;
        accepted = true;
        break;
      }
      lambda *= 0.5;
      ++report.total_backtracks;
    }
    ++report.iterations;
    if (!accepted) break;  // stagnation: no step length decreased the residual
    report.residual_history.push_back(res_norm);
  }

  report.final_residual = res_norm;
  report.converged = res_norm <= config.tol_residual;
  return report;
}

}  // namespace vstates
