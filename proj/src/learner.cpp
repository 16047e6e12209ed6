#include "orbitgames/learner.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace orbitgames {

const char* to_string(LearnStatus status) {
  switch (status) {
    case LearnStatus::kConverged: return "converged";
    case LearnStatus::kBudgetExhausted: return "budget_exhausted";
    case LearnStatus::kSolverFailed: return "solver_failed";
  }
  return "unknown";
}

AdamState AdamState::init(const Eigen::VectorXd& learning_rate, double beta1,
                          double beta2, double epsilon_hat) {
  AdamState state;
  state.first_moment = Eigen::VectorXd::Zero(learning_rate.size());
  state.second_moment = Eigen::VectorXd::Zero(learning_rate.size());
  state.learning_rate = learning_rate;
  state.beta1 = beta1;
  state.beta2 = beta2;
  state.epsilon_hat = epsilon_hat;
  return state;
}

Eigen::VectorXd adam_step(AdamState& state, const Eigen::VectorXd& gradient) {
  if (!gradient.allFinite()) {
    throw std::invalid_argument("adam_step: gradient has non-finite entries");
  }
  if (gradient.size() != state.first_moment.size()) {
    throw std::invalid_argument("adam_step: gradient size mismatch");
  }
  state.step_count += 1;
  state.first_moment =
      state.beta1 * state.first_moment + (1.0 - state.beta1) * gradient;
  state.second_moment = state.beta2 * state.second_moment +
                        (1.0 - state.beta2) * gradient.cwiseAbs2();
  const double m_corr = 1.0 - std::pow(state.beta1, state.step_count);
  const double v_corr = 1.0 - std::pow(state.beta2, state.step_count);
  const Eigen::VectorXd m_hat = state.first_moment / m_corr;
  const Eigen::VectorXd v_hat = state.second_moment / v_corr;
  Eigen::VectorXd denom = v_hat.cwiseSqrt();
  denom.array() += state.epsilon_hat;
  return state.learning_rate.cwiseProduct(m_hat.cwiseQuotient(denom));
}

namespace {

Eigen::VectorXd per_entry_learning_rate(const ThetaLayout& layout,
                                        const LearnOptions& options) {
  Eigen::VectorXd alpha(layout.size());
  for (int e = 0; e < layout.size(); ++e) {
    switch (layout.entries[e].kind) {
      case ThetaLayout::Kind::kOmega: alpha(e) = options.alpha_omega; break;
      case ThetaLayout::Kind::kRho: alpha(e) = options.alpha_rho; break;
      case ThetaLayout::Kind::kXi: alpha(e) = options.alpha_xi; break;
    }
  }
  return alpha;
}

}  // namespace

std::pair<ThetaParams, LearningTrace> learn_parameters(
    const GameSpec& spec, const ThetaParams& theta0, const Trajectory& expert,
    const LearnOptions& options) {
  expert.check_shape(spec.num_robots, spec.state_dim(), spec.control_dim(),
                     spec.horizon);

  ThetaParams theta = theta0;
  LearningTrace trace;
  trace.theta_layout = ThetaLayout::from(spec, theta);
  const ThetaLayout& layout = trace.theta_layout;
  if (layout.size() == 0) {
    throw std::invalid_argument("learn_parameters: no learnable entries");
  }

  AdamState adam = AdamState::init(per_entry_learning_rate(layout, options),
                                   options.beta1, options.beta2,
                                   options.epsilon_hat);
  Eigen::VectorXd internal =
      layout.to_internal(layout.natural(theta, spec));

  SolutionVector warm;
  bool have_warm = false;
  Eigen::VectorXd last_delta;

  const auto clock_start = std::chrono::steady_clock::now;
  using FpSeconds = std::chrono::duration<double>;

  for (int iteration = 1; iteration <= options.max_iterations + 1; ++iteration) {
    const auto t0 = clock_start();

    layout.apply_natural(layout.from_internal(internal), spec, theta);
    SolveResult solve =
        solve_mcp(spec, theta, options.solve, have_warm ? &warm : nullptr);

    if (!solve.converged() && iteration > 1 && last_delta.size() > 0) {
      // Retreat: halve the last Adam delta until the solve recovers, then
      // try once more from a cold start.
      Eigen::VectorXd delta = last_delta;
      for (int attempt = 0;
           attempt < options.retreat_attempts && !solve.converged(); ++attempt) {
        delta *= 0.5;
        internal += delta;  // undo half of the remaining move
        layout.apply_natural(layout.from_internal(internal), spec, theta);
        solve = solve_mcp(spec, theta, options.solve, have_warm ? &warm : nullptr);
      }
      if (!solve.converged()) {
        solve = solve_mcp(spec, theta, options.solve, nullptr);
      }
    }

    LearningIterate record;
    record.iteration = iteration;
    record.theta_natural = layout.natural(theta, spec);
    record.solver_status = solve.status;

    if (!solve.converged()) {
      record.loss = std::numeric_limits<double>::quiet_NaN();
      record.gradient_norm = std::numeric_limits<double>::quiet_NaN();
      record.wall_time_s = FpSeconds(clock_start() - t0).count();
      trace.iterates.push_back(std::move(record));
      trace.status = LearnStatus::kSolverFailed;
      return {theta, trace};
    }

    warm = solve.solution;
    have_warm = true;

    const SensitivityResult sens = solution_sensitivity(
        spec, theta, solve.solution, options.solve.residual_tol);
    const Eigen::VectorXd gradient = loss_gradient(
        spec, solve.solution, sens, expert, options.positions_only_loss);
    record.loss = trajectory_loss(spec, solve.solution, expert,
                                  options.positions_only_loss);
    record.gradient_norm = gradient.norm();
    record.wall_time_s = FpSeconds(clock_start() - t0).count();
    trace.iterates.push_back(record);

    if (record.gradient_norm < options.gradient_tol) {
      trace.status = LearnStatus::kConverged;
      trace.stationary_at_start = (iteration == 1);
      return {theta, trace};
    }
    if (iteration == options.max_iterations + 1) {
      trace.status = LearnStatus::kBudgetExhausted;
      return {theta, trace};
    }

    // Chain rule into internal coordinates (d rho / d log rho = rho).
    const Eigen::VectorXd internal_gradient =
        layout.internal_scaling(record.theta_natural).cwiseProduct(gradient);
    last_delta = adam_step(adam, internal_gradient);
    internal -= last_delta;
  }

  trace.status = LearnStatus::kBudgetExhausted;
  return {theta, trace};
}

}  // namespace orbitgames
