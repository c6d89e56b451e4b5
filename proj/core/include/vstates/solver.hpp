// vstates -- matrix-free Newton-Krylov solver for the Galerkin system.
//
// Unknowns are the M real coefficients a; the equations are the M sine-series
// coefficients b of the rotation residual at fixed Omega. Jacobian action is a
// one-sided finite difference of the residual map; linear solves use restarted
// GMRES with an optional diagonal preconditioner built from the linearization
// at the trivial solution.

#pragma once

#include <functional>
#include <vector>

#include "vstates/spectral.hpp"

namespace vstates {

/// Critical rotation numbers Omega_{n m} = (n m - 1)/(2 n m); the branch with
/// symmetry m bifurcates from the disk at Omega_m = Omega_{1*m}.
double critical_omega(int n_times_m);

/// Diagonal of the residual linearization at the trivial solution:
/// d b_k / d a_k |_{a=0} = k m (Omega - Omega_{k m}).
/// The scale and sign are pinned by a dense finite-difference oracle.
double linearized_multiplier(int k, int m, double omega);

/// Galerkin residual map: synthesize on an N-point grid, evaluate the rotation
/// residual, project onto the first M sine coefficients.
std::vector<double> eval_FM(const PatchCoeffs& coeffs, double omega, int N);

/// One-sided finite-difference Jacobian action (J d) ~ [F(a + eps d) - F(a)]/eps
/// with eps = eps_scale (1 + ||a||_2)/||d||_2; reuses the cached base residual.
std::vector<double> jacobian_vector(const PatchCoeffs& base,
                                    const std::vector<double>& base_residual,
                                    const std::vector<double>& direction,
                                    double omega, int N, double eps_scale);

struct NewtonConfig {
  double tol_residual = 1e-11;   ///< convergence test, inf-norm of b
  int max_iters = 50;
  int max_backtracks = 8;        ///< step halvings per Newton iteration
  double fd_epsilon_scale = 1.49e-8;
  double krylov_tol = 1e-3;      ///< GMRES relative residual target
  int krylov_restart = 30;
  int krylov_max_iters = 500;
  bool use_diag_preconditioner = true;  ///< right-precondition GMRES with the
                                        ///< trivial-linearization diagonal
  bool use_lgmres_augmentation = false;  ///< augment restart cycles with
                                         ///< previous outer corrections
  int lgmres_aug = 2;
};

struct NewtonReport {
  bool converged = false;
  int iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  std::vector<double> residual_history;  ///< inf-norms, one per accepted step
  int total_krylov_iters = 0;
  int total_backtracks = 0;
};

/// Solve F(a; Omega) = 0 in place starting from the passed coefficients.
/// Non-convergence is reported via NewtonReport.converged = false; evaluation
/// failures inside the residual map propagate as exceptions.
NewtonReport newton_solve(PatchCoeffs& coeffs, double omega, int N,
                          const NewtonConfig& config);

/// Restarted GMRES on a matrix-free operator; exposed for reuse and testing.
/// Solves op(x) ~ rhs to relative tolerance; returns the iterate and fills
/// iters/relres if non-null.
std::vector<double> gmres(
    const std::function<std::vector<double>(const std::vector<double>&)>& op,
    const std::vector<double>& rhs, double tol, int restart, int max_iters,
    int* iters_out, double* relres_out,
    const std::vector<double>* right_diag_precond = nullptr,
    bool lgmres_augment = false, int lgmres_aug = 2);

}  // namespace vstates
