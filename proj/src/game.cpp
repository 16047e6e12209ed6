#include "orbitgames/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace orbitgames {

Eigen::VectorXd GameSpec::initial_state_of(int robot) const {
  return initial_state.segment(robot * state_dim(), state_dim());
}

Eigen::Vector2d GameSpec::initial_planar_position(int robot) const {
  return initial_state.segment<2>(robot * state_dim());
}

std::vector<int> GameSpec::pairs_of_robot(int robot) const {
  std::vector<int> out;
  for (int p = 0; p < num_pairs(); ++p) {
    if (pairs[p].i == robot || pairs[p].j == robot) out.push_back(p);
  }
  return out;
}

void GameSpec::validate() const {
  if (num_robots < 1) throw std::invalid_argument("GameSpec: need at least one robot");
  if (horizon < 2) throw std::invalid_argument("GameSpec: horizon must be >= 2");
  if (!(dt > 0.0)) throw std::invalid_argument("GameSpec: dt must be > 0");
  if (!(thrust_limit > 0.0)) throw std::invalid_argument("GameSpec: thrust_limit must be > 0");

  const int sd = state_dim();
  const int cd = control_dim();
  if (sd != 2 * position_dim() || cd != position_dim()) {
    throw std::invalid_argument("GameSpec: dynamics dims are not a position/velocity split");
  }
  const int expected_sd = (mode == SpatialMode::kPlanar) ? 4 : 6;
  if (sd != expected_sd) {
    throw std::invalid_argument("GameSpec: state_dim " + std::to_string(sd) +
                                " does not match spatial mode");
  }
  if (initial_state.size() != static_cast<Eigen::Index>(num_robots) * sd) {
    throw std::invalid_argument("GameSpec: initial_state has wrong size");
  }
  if (static_cast<int>(goal_positions.size()) != num_robots) {
    throw std::invalid_argument("GameSpec: need one goal per robot");
  }
  for (const auto& g : goal_positions) {
    if (g.size() != position_dim()) {
      throw std::invalid_argument("GameSpec: goal dimension mismatch");
    }
  }
  if (control_weight.size() != num_robots || (control_weight.array() < 0.0).any()) {
    throw std::invalid_argument("GameSpec: control_weight must be >= 0 per robot");
  }
  for (const auto& pair : pairs) {
    if (pair.i == pair.j || pair.i < 0 || pair.j < 0 || pair.i >= num_robots ||
        pair.j >= num_robots) {
      throw std::invalid_argument("GameSpec: pair (" + std::to_string(pair.i + 1) +
                                  ", " + std::to_string(pair.j + 1) + ") is invalid");
    }
  }
  if (!dynamics.A.allFinite() || !dynamics.B.allFinite()) {
    throw std::invalid_argument("GameSpec: dynamics matrices must be finite");
  }
}

ThetaParams ThetaParams::for_spec(const GameSpec& spec, double omega0, double rho0) {
  ThetaParams theta;
  const int p = spec.num_pairs();
  theta.omega = Eigen::VectorXd::Constant(p, omega0);
  theta.rho = Eigen::VectorXd::Constant(p, rho0);
  theta.omega_learnable.assign(p, true);
  theta.rho_learnable.assign(p, true);
  theta.xi_learnable.assign(spec.num_robots, false);
  return theta;
}

double ThetaParams::xi(const GameSpec& spec, int robot) const {
  if (xi_override && xi_override->size() == spec.num_robots) {
    return (*xi_override)(robot);
  }
  return spec.control_weight(robot);
}

void ThetaParams::validate(const GameSpec& spec) const {
  const int p = spec.num_pairs();
  if (omega.size() != p || rho.size() != p) {
    throw std::invalid_argument("ThetaParams: need one (omega, rho) per pair");
  }
  if ((rho.array() <= 0.0).any()) {
    throw std::invalid_argument("ThetaParams: rho must be > 0");
  }
  if (xi_override && xi_override->size() != spec.num_robots) {
    throw std::invalid_argument("ThetaParams: xi_override size mismatch");
  }
}

Eigen::Vector2d HyperplaneGeometry::normal(int t) const {
  const double psi = angle(t);
  return {std::cos(psi), std::sin(psi)};
}

Eigen::Vector2d HyperplaneGeometry::tangent_point(int t, const Eigen::Vector2d& p_j) const {
  return p_j + koz_radius * normal(t);
}

double alpha_from_initial_state(const GameSpec& spec, const RobotPair& pair) {
  const Eigen::Vector2d diff =
      spec.initial_planar_position(pair.i) - spec.initial_planar_position(pair.j);
  if (diff.norm() < 1e-12) {
    throw std::domain_error("alpha_from_initial_state: robots " +
                            std::to_string(pair.i + 1) + " and " +
                            std::to_string(pair.j + 1) +
                            " start at coincident planar positions");
  }
  return std::atan2(diff.y(), diff.x());
}

Eigen::VectorXd reference_angles(const GameSpec& spec) {
  Eigen::VectorXd alphas(spec.num_pairs());
  for (int p = 0; p < spec.num_pairs(); ++p) {
    alphas(p) = alpha_from_initial_state(spec, spec.pairs[p]);
  }
  return alphas;
}

double hyperplane_value(const GameSpec& spec, const ThetaParams& theta,
                        double alpha, int pair_index, int t,
                        const Eigen::VectorXd& x_t) {
  if (t < 2 || t > spec.horizon) {
    throw std::out_of_range("hyperplane_value: t must be in [2, T]");
  }
  const RobotPair& pair = spec.pairs[pair_index];
  const int sd = spec.state_dim();
  const Eigen::Vector2d p_i = x_t.segment<2>(pair.i * sd);
  const Eigen::Vector2d p_j = x_t.segment<2>(pair.j * sd);
  const double psi = alpha + theta.omega(pair_index) * (t - 1) * spec.dt;
  const Eigen::Vector2d n(std::cos(psi), std::sin(psi));
  // n . (p_i - m_t) with m_t = p_j + rho n and |n| = 1.
  return n.dot(p_i - p_j) - theta.rho(pair_index);
}

double objective_value(const GameSpec& spec, const ThetaParams& theta,
                       const Trajectory& traj, int robot) {
  traj.check_shape(spec.num_robots, spec.state_dim(), spec.control_dim(),
                   spec.horizon);
  const Eigen::VectorXd p_final = traj.position(spec.horizon, robot);
  double value = (p_final - spec.goal_positions[robot]).squaredNorm();
  const int cd = spec.control_dim();
  value += theta.xi(spec, robot) *
           traj.controls.middleCols(robot * cd, cd).squaredNorm();
  return value;
}

bool FeasibilityReport::feasible(double thrust_limit, double h_tol, double u_tol,
                                 double dyn_tol) const {
  const bool h_ok = min_hyperplane_value.size() == 0 ||
                    min_hyperplane_value.minCoeff() >= -h_tol;
  return h_ok && max_abs_control <= thrust_limit + u_tol &&
         max_dynamics_residual <= dyn_tol;
}

FeasibilityReport feasibility_report(const GameSpec& spec,
                                     const ThetaParams& theta,
                                     const Trajectory& traj) {
  traj.check_shape(spec.num_robots, spec.state_dim(), spec.control_dim(),
                   spec.horizon);
  FeasibilityReport report;
  const int sd = spec.state_dim();

  report.min_hyperplane_value.resize(spec.num_pairs());
  report.min_pair_distance = std::numeric_limits<double>::infinity();
  for (int p = 0; p < spec.num_pairs(); ++p) {
    const double alpha = alpha_from_initial_state(spec, spec.pairs[p]);
    double min_h = std::numeric_limits<double>::infinity();
    for (int t = 2; t <= spec.horizon; ++t) {
      min_h = std::min(min_h, hyperplane_value(spec, theta, alpha, p, t,
                                               traj.states.row(t - 1).transpose()));
    }
    report.min_hyperplane_value(p) = min_h;
    for (int t = 1; t <= spec.horizon; ++t) {
      const double dist = (traj.planar_position(t, spec.pairs[p].i) -
                           traj.planar_position(t, spec.pairs[p].j))
                              .norm();
      report.min_pair_distance = std::min(report.min_pair_distance, dist);
    }
  }
  if (spec.num_pairs() == 0) report.min_pair_distance = 0.0;

  report.max_abs_control =
      traj.controls.size() == 0 ? 0.0 : traj.controls.array().abs().maxCoeff();

  double max_residual = 0.0;
  for (int t = 1; t < spec.horizon; ++t) {
    for (int i = 0; i < spec.num_robots; ++i) {
      const Eigen::VectorXd residual =
          traj.state(t + 1, i) - spec.dynamics.A * traj.state(t, i) -
          spec.dynamics.B * traj.control(t, i);
      max_residual = std::max(max_residual, residual.lpNorm<Eigen::Infinity>());
    }
  }
  report.max_dynamics_residual = max_residual;
  return report;
}

}  // namespace orbitgames
