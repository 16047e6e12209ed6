#include "orbitgames/trajectory.hpp"

#include <stdexcept>
#include <string>

namespace orbitgames {

namespace {

void check_t(int t, int rows, const char* what) {
  if (t < 1 || t > rows) {
    throw std::out_of_range(std::string(what) + ": timestep " +
                            std::to_string(t) + " outside [1, " +
                            std::to_string(rows) + "]");
  }
}

}  // namespace

Eigen::VectorXd Trajectory::state(int t, int robot) const {
  check_t(t, horizon(), "Trajectory::state");
  return states.row(t - 1).segment(robot * state_dim, state_dim);
}

Eigen::VectorXd Trajectory::control(int t, int robot) const {
  check_t(t, static_cast<int>(controls.rows()), "Trajectory::control");
  return controls.row(t - 1).segment(robot * control_dim, control_dim);
}

Eigen::Vector2d Trajectory::planar_position(int t, int robot) const {
  check_t(t, horizon(), "Trajectory::planar_position");
  return states.row(t - 1).segment<2>(robot * state_dim);
}

Eigen::VectorXd Trajectory::position(int t, int robot) const {
  check_t(t, horizon(), "Trajectory::position");
  return states.row(t - 1).segment(robot * state_dim, state_dim / 2);
}

Eigen::MatrixXd Trajectory::opponent_states(int robot) const {
  Eigen::MatrixXd out(states.rows(), (num_robots - 1) * state_dim);
  int col = 0;
  for (int i = 0; i < num_robots; ++i) {
    if (i == robot) continue;
    out.middleCols(col, state_dim) = states.middleCols(i * state_dim, state_dim);
    col += state_dim;
  }
  return out;
}

void Trajectory::check_shape(int expected_robots, int expected_state_dim,
                             int expected_control_dim,
                             int expected_horizon) const {
  const bool states_ok =
      num_robots == expected_robots && state_dim == expected_state_dim &&
      states.rows() == expected_horizon &&
      states.cols() == expected_robots * expected_state_dim;
  const bool controls_ok =
      control_dim == expected_control_dim &&
      controls.rows() == expected_horizon - 1 &&
      controls.cols() == expected_robots * expected_control_dim;
  if (!states_ok || !controls_ok) {
    throw std::invalid_argument(
        "Trajectory::check_shape: got states " + std::to_string(states.rows()) +
        "x" + std::to_string(states.cols()) + ", controls " +
        std::to_string(controls.rows()) + "x" + std::to_string(controls.cols()) +
        " for N=" + std::to_string(expected_robots) + ", T=" +
        std::to_string(expected_horizon));
  }
}

}  // namespace orbitgames
