#pragma once

#include <Eigen/Dense>

namespace orbitgames {

/// Time-major stacked states and controls for all robots.
///
/// Row t-1 of `states` holds [x_t^1, ..., x_t^N] for the 1-based timestep t,
/// t = 1..T. Row t-1 of `controls` holds [u_t^1, ..., u_t^N] for t = 1..T-1.
/// Timestep arguments throughout this codebase are 1-based to match the
/// difference equation x_{t+1} = A x_t + B u_t; robot indices are 0-based.
struct Trajectory {
  int num_robots = 0;
  int state_dim = 0;    // per robot
  int control_dim = 0;  // per robot

  Eigen::MatrixXd states;    // T x (num_robots * state_dim)
  Eigen::MatrixXd controls;  // (T-1) x (num_robots * control_dim)

  int horizon() const { return static_cast<int>(states.rows()); }

  Eigen::VectorXd state(int t, int robot) const;
  Eigen::VectorXd control(int t, int robot) const;

  /// Planar position (first two state entries) of `robot` at timestep t.
  Eigen::Vector2d planar_position(int t, int robot) const;

  /// Position block (first state_dim/2 entries) of `robot` at timestep t.
  Eigen::VectorXd position(int t, int robot) const;

  /// Stacked states of all robots except `robot`, per timestep.
  Eigen::MatrixXd opponent_states(int robot) const;

  void check_shape(int expected_robots, int expected_state_dim,
                   int expected_control_dim, int expected_horizon) const;
};

}  // namespace orbitgames
