#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "orbitgames/orbit.hpp"
#include "orbitgames/trajectory.hpp"

namespace orbitgames {

enum class SpatialMode { kPlanar, kFull3d };

/// Ordered robot pair (i, j), 0-based. The keep-out zone is centered on
/// robot j; robot i stays on the moving hyperplane's feasible side.
struct RobotPair {
  int i = 0;
  int j = 0;
};

/// Full description of one collision-avoidance game instance.
struct GameSpec {
  int num_robots = 0;
  int horizon = 0;  // T, number of state timesteps (>= 2)
  SpatialMode mode = SpatialMode::kPlanar;
  LinearDynamics dynamics;  // per-robot block
  double dt = 0.0;          // s, spacing between timesteps

  Eigen::VectorXd initial_state;                // num_robots * state_dim
  std::vector<Eigen::VectorXd> goal_positions;  // position_dim each
  Eigen::VectorXd control_weight;               // xi per robot, >= 0
  double thrust_limit = 0.0;                    // u_max, N (per component)
  std::vector<RobotPair> pairs;                 // Omega

  int state_dim() const { return dynamics.state_dim; }
  int control_dim() const { return dynamics.control_dim; }
  int position_dim() const { return dynamics.state_dim / 2; }
  int num_pairs() const { return static_cast<int>(pairs.size()); }

  Eigen::VectorXd initial_state_of(int robot) const;
  Eigen::Vector2d initial_planar_position(int robot) const;

  /// Indices into `pairs` of every pair that involves `robot`.
  std::vector<int> pairs_of_robot(int robot) const;

  void validate() const;
};

/// Learnable hyperplane parameters (omega, rho per pair) plus optional
/// per-robot control-weight overrides. Boolean masks select which entries a
/// learner may move; frozen entries keep their configured values.
struct ThetaParams {
  Eigen::VectorXd omega;  // rad/s, per pair in spec.pairs order
  Eigen::VectorXd rho;    // m, per pair, > 0
  std::optional<Eigen::VectorXd> xi_override;  // per robot

  std::vector<bool> omega_learnable;  // default all true
  std::vector<bool> rho_learnable;    // default all true
  std::vector<bool> xi_learnable;     // default all false

  static ThetaParams for_spec(const GameSpec& spec, double omega0, double rho0);

  double xi(const GameSpec& spec, int robot) const;
  void validate(const GameSpec& spec) const;
};

/// Rotating separating hyperplane for one pair: at timestep t the unit
/// normal points at angle alpha + omega * (t-1) * dt from the x-axis and the
/// plane is tangent to the KOZ of radius rho around robot j.
struct HyperplaneGeometry {
  RobotPair pair;
  double reference_angle = 0.0;  // alpha, rad
  double rotation_rate = 0.0;    // omega, rad/s
  double koz_radius = 0.0;       // rho, m
  double dt = 0.0;

  double angle(int t) const { return reference_angle + rotation_rate * (t - 1) * dt; }
  Eigen::Vector2d normal(int t) const;

  /// Tangent point m_t given robot j's planar position.
  Eigen::Vector2d tangent_point(int t, const Eigen::Vector2d& p_j) const;
};

/// Angle between the x-axis and p_1^i - p_1^j, fixed for the whole game.
double alpha_from_initial_state(const GameSpec& spec, const RobotPair& pair);

/// All pair reference angles in spec.pairs order.
Eigen::VectorXd reference_angles(const GameSpec& spec);

/// Signed distance surrogate H_t = n_t . (p_t^i - m_t) for t in [2, T].
/// `x_t` is the stacked all-robot state at timestep t.
double hyperplane_value(const GameSpec& spec, const ThetaParams& theta,
                        double alpha, int pair_index, int t,
                        const Eigen::VectorXd& x_t);

/// J^i = |p_T^i - goal^i|^2 + xi^i |u^i|^2.
double objective_value(const GameSpec& spec, const ThetaParams& theta,
                       const Trajectory& traj, int robot);

struct FeasibilityReport {
  Eigen::VectorXd min_hyperplane_value;  // per pair, over t in [2, T]
  double min_pair_distance = 0.0;        // planar, over pairs in Omega
  double max_abs_control = 0.0;
  double max_dynamics_residual = 0.0;

  bool feasible(double thrust_limit, double h_tol = 1e-6, double u_tol = 1e-8,
                double dyn_tol = 1e-8) const;
};

FeasibilityReport feasibility_report(const GameSpec& spec,
                                     const ThetaParams& theta,
                                     const Trajectory& traj);

}  // namespace orbitgames
