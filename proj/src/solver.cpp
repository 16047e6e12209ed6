#include "orbitgames/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

namespace orbitgames {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kMaxIterations: return "max_iterations";
    case SolveStatus::kDiverged: return "diverged";
    case SolveStatus::kSingular: return "singular";
  }
  return "unknown";
}

namespace {

// Newton system over a subset of z entries; excluded entries stay frozen.
// The full-game solve uses all entries; the best-response check restricts
// to one robot's states, controls, and multipliers.
struct ReducedMcp {
  const GameSpec& spec;
  const ThetaParams& theta;
  SolutionVector iterate;     // full-size, frozen entries never move
  std::vector<int> active;    // ascending indices of unknowns

  int size() const { return static_cast<int>(active.size()); }

  Eigen::VectorXd residual(const Eigen::VectorXd& z_full) const {
    SolutionVector tmp{iterate.layout, z_full};
    const Eigen::VectorXd full = kkt_residual(spec, theta, tmp);
    if (size() == iterate.layout.size) return full;
    Eigen::VectorXd out(size());
    for (int k = 0; k < size(); ++k) out(k) = full(active[k]);
    return out;
  }

  void jacobian(const Eigen::VectorXd& z_full,
                std::vector<Eigen::Triplet<double>>& out) const {
    SolutionVector tmp{iterate.layout, z_full};
    std::vector<Eigen::Triplet<double>> full;
    kkt_jacobian_triplets(spec, theta, tmp, full);
    if (size() == iterate.layout.size) {
      out = std::move(full);
      return;
    }
    std::vector<int> position(iterate.layout.size, -1);
    for (int k = 0; k < size(); ++k) position[active[k]] = k;
    out.clear();
    out.reserve(full.size());
    for (const auto& t : full) {
      const int r = position[t.row()];
      const int c = position[t.col()];
      if (r >= 0 && c >= 0) out.emplace_back(r, c, t.value());
    }
  }

  void apply_step(Eigen::VectorXd& z_full, const Eigen::VectorXd& d,
                  double step) const {
    for (int k = 0; k < size(); ++k) z_full(active[k]) += step * d(k);
  }
};

struct LinearSolver {
  bool use_dense;
  explicit LinearSolver(int n, LinearSolverKind kind) {
    use_dense = (kind == LinearSolverKind::kDense) ||
                (kind == LinearSolverKind::kAuto &&
                 n <= SolveOptions::kDenseSizeLimit);
  }

  // Solves (J + delta I) d = -F. Returns false when the factorization is
  // unusable (non-finite solution or large linear residual).
  bool solve(const std::vector<Eigen::Triplet<double>>& triplets, int n,
             double delta, const Eigen::VectorXd& F, Eigen::VectorXd& d) const {
    if (use_dense) {
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
      for (const auto& t : triplets) J(t.row(), t.col()) += t.value();
      J.diagonal().array() += delta;
      d = Eigen::PartialPivLU<Eigen::MatrixXd>(J).solve(-F);
      if (!d.allFinite()) return false;
      const double lin_res = (J * d + F).lpNorm<Eigen::Infinity>();
      return lin_res <= 1e-8 * std::max(1.0, F.lpNorm<Eigen::Infinity>());
    }
    Eigen::SparseMatrix<double> J(n, n);
    J.setFromTriplets(triplets.begin(), triplets.end());
    for (int k = 0; k < n; ++k) J.coeffRef(k, k) += delta;
    J.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) return false;
    d = lu.solve(-F);
    if (!d.allFinite()) return false;
    const double lin_res = (J * d + F).lpNorm<Eigen::Infinity>();
    return lin_res <= 1e-8 * std::max(1.0, F.lpNorm<Eigen::Infinity>());
  }
};

struct NewtonOutcome {
  SolveStatus status = SolveStatus::kMaxIterations;
  int iterations = 0;
  double final_residual = std::numeric_limits<double>::infinity();
  std::vector<double> residual_history;
};

// Armijo backtracking along d; returns the accepted step or 0 on failure.
double line_search(const ReducedMcp& sys, Eigen::VectorXd& z_full,
                   const Eigen::VectorXd& d, double merit, double slope,
                   const SolveOptions& options, Eigen::VectorXd& F_next) {
  double step = 1.0;
  while (step >= options.min_step) {
    Eigen::VectorXd z_trial = z_full;
    sys.apply_step(z_trial, d, step);
    const Eigen::VectorXd F_trial = sys.residual(z_trial);
    const double merit_trial = 0.5 * F_trial.squaredNorm();
    if (std::isfinite(merit_trial) &&
        merit_trial <= merit + options.armijo_slope * step * slope) {
      z_full = z_trial;
      F_next = F_trial;
      return step;
    }
    step *= options.backtrack_factor;
  }
  return 0.0;
}

NewtonOutcome newton_solve(ReducedMcp& sys, const SolveOptions& options) {
  NewtonOutcome out;
  const int n = sys.size();
  const LinearSolver linear(n, options.linear_solver);

  Eigen::VectorXd z = sys.iterate.z;
  Eigen::VectorXd F = sys.residual(z);
  Eigen::VectorXd z_best = z;
  double best_residual = F.lpNorm<Eigen::Infinity>();
  out.residual_history.push_back(best_residual);
  int polish_left = options.polish_iterations;
  SolveStatus abort_status = SolveStatus::kMaxIterations;

  std::vector<Eigen::Triplet<double>> triplets;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const double res_inf = F.lpNorm<Eigen::Infinity>();
    if (res_inf <= options.residual_tol) {
      if (polish_left <= 0) break;
      --polish_left;
    }
    const double merit = 0.5 * F.squaredNorm();
    if (merit > options.merit_divergence_cap) {
      abort_status = SolveStatus::kDiverged;
      break;
    }

    sys.jacobian(z, triplets);

    Eigen::VectorXd d;
    double delta = options.regularization_init;
    bool factored = false;
    while (true) {
      if (linear.solve(triplets, n, delta, F, d)) {
        factored = true;
        break;
      }
      if (delta >= options.regularization_max) break;
      delta = std::min(delta * 10.0, options.regularization_max);
    }
    if (!factored) {
      abort_status = SolveStatus::kSingular;
      break;
    }

    Eigen::VectorXd F_next;
    double step = line_search(sys, z, d, merit, -2.0 * merit, options, F_next);
    if (step == 0.0) {
      // Fall back to the merit gradient J^T F.
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
      for (const auto& t : triplets) grad(t.col()) += t.value() * F(t.row());
      const double grad_norm2 = grad.squaredNorm();
      if (grad_norm2 > 0.0) {
        const Eigen::VectorXd d_grad = -grad;
        step = line_search(sys, z, d_grad, merit, -grad_norm2, options, F_next);
      }
      if (step == 0.0) break;  // stalled in both directions
    }
    F = F_next;
    const double new_res = F.lpNorm<Eigen::Infinity>();
    out.residual_history.push_back(new_res);
    if (new_res < best_residual) {
      best_residual = new_res;
      z_best = z;
    }
    if (options.iteration_log) {
      (*options.iteration_log) << iter << "," << new_res << "," << step << "\n";
    }
  }

  out.iterations = iter;
  sys.iterate.z = z_best;
  out.final_residual = best_residual;
  out.status = best_residual <= options.residual_tol ? SolveStatus::kConverged
                                                     : abort_status;
  return out;
}

void check_initial_geometry(const GameSpec& spec, const ThetaParams& theta) {
  for (int p = 0; p < spec.num_pairs(); ++p) {
    const RobotPair& pair = spec.pairs[p];
    const double separation = (spec.initial_planar_position(pair.i) -
                               spec.initial_planar_position(pair.j))
                                  .norm();
    if (separation <= theta.rho(p)) {
      throw InfeasibleGeometryError(
          "infeasible geometry: robots " + std::to_string(pair.i + 1) + " and " +
          std::to_string(pair.j + 1) + " start " + std::to_string(separation) +
          " m apart, inside the KOZ radius " + std::to_string(theta.rho(p)) +
          " m");
    }
  }
}

}  // namespace

SolutionVector initial_guess(const GameSpec& spec, const ThetaParams& theta) {
  spec.validate();
  theta.validate(spec);
  const SolutionLayout layout = index_map(spec);
  const int T = spec.horizon;
  const int sd = spec.state_dim();
  const int cd = spec.control_dim();
  const int pd = spec.position_dim();

  SolutionVector guess{layout, Eigen::VectorXd::Zero(layout.size)};

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> b_qr(spec.dynamics.B);
  for (int i = 0; i < spec.num_robots; ++i) {
    const Eigen::VectorXd x1 = spec.initial_state_of(i);
    const Eigen::VectorXd p1 = x1.head(pd);
    const Eigen::VectorXd& goal = spec.goal_positions[i];

    // Interpolated positions p_t for t = 1..T and finite-difference
    // velocities.
    Eigen::MatrixXd positions(T, pd);
    for (int t = 1; t <= T; ++t) {
      const double s = static_cast<double>(t - 1) / (T - 1);
      positions.row(t - 1) = ((1.0 - s) * p1 + s * goal).transpose();
    }
    Eigen::MatrixXd velocities(T, pd);
    velocities.row(0) = (positions.row(1) - positions.row(0)) / spec.dt;
    for (int t = 2; t <= T - 1; ++t) {
      velocities.row(t - 1) =
          (positions.row(t) - positions.row(t - 2)) / (2.0 * spec.dt);
    }
    velocities.row(T - 1) = (positions.row(T - 1) - positions.row(T - 2)) / spec.dt;

    Eigen::MatrixXd states(T, sd);
    states.row(0) = x1.transpose();
    for (int t = 2; t <= T; ++t) {
      states.row(t - 1).head(pd) = positions.row(t - 1);
      states.row(t - 1).tail(pd) = velocities.row(t - 1);
    }

    for (int t = 2; t <= T; ++t) {
      guess.z.segment(layout.x_index(i, t, 0), sd) = states.row(t - 1);
    }
    for (int t = 1; t <= T - 1; ++t) {
      const Eigen::VectorXd rhs =
          states.row(t).transpose() - spec.dynamics.A * states.row(t - 1).transpose();
      Eigen::VectorXd u = b_qr.solve(rhs);
      u = u.cwiseMax(-spec.thrust_limit).cwiseMin(spec.thrust_limit);
      guess.z.segment(layout.u_index(i, t, 0), cd) = u;
    }
  }

  const int multiplier_start = layout.v_offset;
  guess.z.segment(multiplier_start, layout.size - multiplier_start)
      .setConstant(1e-2);
  return guess;
}

SolveResult solve_mcp(const GameSpec& spec, const ThetaParams& theta,
                      const SolveOptions& options,
                      const SolutionVector* warm_start) {
  spec.validate();
  theta.validate(spec);
  check_initial_geometry(spec, theta);

  SolutionVector start = warm_start ? *warm_start : initial_guess(spec, theta);
  const SolutionLayout layout = index_map(spec);
  if (warm_start && (start.layout.size != layout.size ||
                     start.z.size() != layout.size)) {
    throw std::invalid_argument("solve_mcp: warm start does not match layout");
  }
  start.layout = layout;

  ReducedMcp sys{spec, theta, start, {}};
  sys.active.resize(layout.size);
  for (int k = 0; k < layout.size; ++k) sys.active[k] = k;

  const NewtonOutcome outcome = newton_solve(sys, options);

  SolveResult result;
  result.solution = sys.iterate;
  result.status = outcome.status;
  result.iterations = outcome.iterations;
  result.final_residual = outcome.final_residual;
  result.residual_history = outcome.residual_history;
  return result;
}

BestResponseResult best_response_check(const GameSpec& spec,
                                       const ThetaParams& theta,
                                       const SolutionVector& z_star, int robot,
                                       const SolveOptions& options) {
  const SolutionLayout& L = z_star.layout;
  BestResponseResult out;

  const Trajectory equilibrium = unpack_trajectory(spec, z_star);
  out.equilibrium_cost = objective_value(spec, theta, equilibrium, robot);

  ReducedMcp sys{spec, theta, z_star, {}};
  for (int t = 2; t <= spec.horizon; ++t) {
    for (int k = 0; k < spec.state_dim(); ++k) {
      sys.active.push_back(L.x_index(robot, t, k));
    }
  }
  for (int t = 1; t <= spec.horizon - 1; ++t) {
    for (int k = 0; k < spec.control_dim(); ++k) {
      sys.active.push_back(L.u_index(robot, t, k));
    }
  }
  for (int t = 1; t <= spec.horizon - 1; ++t) {
    for (int k = 0; k < spec.state_dim(); ++k) {
      sys.active.push_back(L.w_index(robot, t, k));
    }
  }
  for (int p : spec.pairs_of_robot(robot)) {
    for (int t = 2; t <= spec.horizon; ++t) {
      sys.active.push_back(L.v_index(p, t));
    }
  }
  for (int t = 1; t <= spec.horizon - 1; ++t) {
    for (int k = 0; k < spec.control_dim(); ++k) {
      sys.active.push_back(L.lam_hi_index(robot, t, k));
    }
  }
  for (int t = 1; t <= spec.horizon - 1; ++t) {
    for (int k = 0; k < spec.control_dim(); ++k) {
      sys.active.push_back(L.lam_lo_index(robot, t, k));
    }
  }
  std::sort(sys.active.begin(), sys.active.end());

  const NewtonOutcome outcome = newton_solve(sys, options);
  out.inner_status = outcome.status;
  if (outcome.status != SolveStatus::kConverged) {
    out.conclusive = false;
    return out;
  }
  const Trajectory response = unpack_trajectory(spec, sys.iterate);
  out.best_response_cost = objective_value(spec, theta, response, robot);
  out.improvement = out.equilibrium_cost - out.best_response_cost;
  out.conclusive = true;
  return out;
}

}  // namespace orbitgames
