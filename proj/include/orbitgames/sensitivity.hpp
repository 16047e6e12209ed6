#pragma once

#include <Eigen/Dense>

#include "orbitgames/kkt.hpp"

namespace orbitgames {

enum class SensitivityMethod { kDirect, kLeastSquares };

struct SensitivityResult {
  Eigen::MatrixXd dz_dtheta;  // (dim z) x (learnable theta), natural units
  double conditioning = 0.0;  // smallest pivot magnitude of the factorization
  SensitivityMethod method = SensitivityMethod::kDirect;
  ThetaLayout theta_layout;
};

/// Implicit-function derivative of the equilibrium:
/// dz*/dtheta = -(dF/dz)^-1 dF/dtheta at (z*, theta).
/// Requires |F(z*)|_inf <= tol; falls back to a minimum-norm least-squares
/// solve when the factorization pivots collapse.
SensitivityResult solution_sensitivity(const GameSpec& spec,
                                       const ThetaParams& theta,
                                       const SolutionVector& z_star,
                                       double residual_tol = 1e-6);

/// l(x, expert) = |x - expert|^2 summed over state entries (optionally
/// positions only). The fixed initial state contributes a constant.
double trajectory_loss(const GameSpec& spec, const SolutionVector& z_star,
                       const Trajectory& expert, bool positions_only = false);

/// Chain-rule gradient of trajectory_loss through dz*/dtheta, natural units.
Eigen::VectorXd loss_gradient(const GameSpec& spec, const SolutionVector& z_star,
                              const SensitivityResult& sensitivity,
                              const Trajectory& expert,
                              bool positions_only = false);

}  // namespace orbitgames
