#pragma once

#include <cmath>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "orbitgames/kkt.hpp"

namespace orbitgames {

/// Thrown when a game's initial geometry already violates a keep-out zone.
class InfeasibleGeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SolveStatus { kConverged, kMaxIterations, kDiverged, kSingular };

const char* to_string(SolveStatus status);

enum class LinearSolverKind { kAuto, kDense, kSparse };

struct SolveOptions {
  int max_iterations = 200;
  double residual_tol = 1e-6;  // infinity norm of F

  // Armijo backtracking on the merit 0.5*|F|^2.
  double armijo_slope = 1e-4;
  double backtrack_factor = 0.5;
  double min_step = 1e-10;

  // Tikhonov regularization ladder for the Newton system.
  double regularization_init = 1e-8;
  double regularization_max = 1e-2;

  double merit_divergence_cap = 1e12;

  // Extra full Newton steps after the tolerance is met; the semismooth
  // endgame is superlinear, so these drive the dynamics rows well below
  // the certificate threshold.
  int polish_iterations = 2;

  // kAuto picks dense LU below kDenseSizeLimit unknowns, sparse LU above.
  LinearSolverKind linear_solver = LinearSolverKind::kAuto;
  static constexpr int kDenseSizeLimit = 1500;

  // Optional CSV diagnostics stream: iteration,residual,step.
  std::ostream* iteration_log = nullptr;
};

struct SolveResult {
  SolutionVector solution;
  SolveStatus status = SolveStatus::kMaxIterations;
  int iterations = 0;
  double final_residual = 0.0;
  std::vector<double> residual_history;

  bool converged() const { return status == SolveStatus::kConverged; }
};

/// Cold-start iterate: straight-line position interpolation to the goal,
/// finite-difference velocities, least-squares controls against the
/// dynamics (clamped to the thrust box), zero w, and small positive
/// inequality multipliers.
SolutionVector initial_guess(const GameSpec& spec, const ThetaParams& theta);

/// Damped semismooth Newton on F(z; theta) = 0. Throws
/// InfeasibleGeometryError if any pair starts closer than its KOZ radius.
SolveResult solve_mcp(const GameSpec& spec, const ThetaParams& theta,
                      const SolveOptions& options = {},
                      const SolutionVector* warm_start = nullptr);

struct BestResponseResult {
  double equilibrium_cost = 0.0;
  double best_response_cost = 0.0;
  double improvement = 0.0;  // equilibrium_cost - best_response_cost
  bool conclusive = false;   // false when the inner solve failed
  SolveStatus inner_status = SolveStatus::kMaxIterations;

  bool valid_equilibrium(double rel_tol = 1e-4) const {
    return conclusive &&
           improvement <= rel_tol * (1.0 + std::abs(equilibrium_cost));
  }
};

/// Re-solves robot `robot`'s single-player problem with every opponent
/// frozen at the equilibrium trajectory and reports the cost improvement a
/// unilateral deviation could achieve.
BestResponseResult best_response_check(const GameSpec& spec,
                                       const ThetaParams& theta,
                                       const SolutionVector& z_star, int robot,
                                       const SolveOptions& options = {});

}  // namespace orbitgames
