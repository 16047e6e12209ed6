#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "orbitgames/sensitivity.hpp"
#include "orbitgames/solver.hpp"

namespace orbitgames {

/// Bias-corrected Adam accumulator over the internal parameter coordinates.
struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long step_count = 0;

  Eigen::VectorXd learning_rate;  // per parameter
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon_hat = 1e-8;

  static AdamState init(const Eigen::VectorXd& learning_rate, double beta1 = 0.9,
                        double beta2 = 0.999, double epsilon_hat = 1e-8);
};

/// One Adam update; returns the delta to subtract from the parameters.
/// Throws on non-finite gradients.
Eigen::VectorXd adam_step(AdamState& state, const Eigen::VectorXd& gradient);

struct LearnOptions {
  // Per-kind learning rates in internal coordinates (omega raw, rho in log
  // space). The log-rho rate is larger because a KOZ radius that starts at a
  // third of its true value needs to cover about one unit of log distance
  // within the iteration budget.
  double alpha_omega = 5e-4;
  double alpha_rho = 5e-2;
  double alpha_xi = 5e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon_hat = 1e-8;

  double gradient_tol = 1e-4;  // epsilon on |grad l| (natural units)
  int max_iterations = 30;     // Adam steps
  int retreat_attempts = 3;    // delta halvings after a failed forward solve
  bool positions_only_loss = false;

  SolveOptions solve;
};

enum class LearnStatus { kConverged, kBudgetExhausted, kSolverFailed };

const char* to_string(LearnStatus status);

struct LearningIterate {
  int iteration = 0;                // 1-based
  Eigen::VectorXd theta_natural;    // learnable entries, natural units
  double loss = 0.0;                // NaN when the forward solve failed
  double gradient_norm = 0.0;
  SolveStatus solver_status = SolveStatus::kMaxIterations;
  double wall_time_s = 0.0;
};

struct LearningTrace {
  std::vector<LearningIterate> iterates;
  LearnStatus status = LearnStatus::kBudgetExhausted;
  bool stationary_at_start = false;
  ThetaLayout theta_layout;
};

/// Algorithm: loop { solve MCP(theta); sensitivity; loss gradient; Adam
/// step } until |grad| < gradient_tol or the budget is exhausted. Forward
/// solves warm-start from the previous iterate's solution; a failed solve
/// triggers delta halvings and finally a cold restart before giving up.
std::pair<ThetaParams, LearningTrace> learn_parameters(const GameSpec& spec,
                                                       const ThetaParams& theta0,
                                                       const Trajectory& expert,
                                                       const LearnOptions& options);

}  // namespace orbitgames
