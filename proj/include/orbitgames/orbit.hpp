#pragma once

#include <Eigen/Dense>

#include "orbitgames/trajectory.hpp"

namespace orbitgames {

/// Physical constants for a circular reference orbit plus the discretization
/// interval. All quantities are SI.
struct OrbitConstants {
  double gravitational_parameter = 3.986004418e14;  // m^3/s^2 (Earth mu)
  double earth_radius = 6.371e6;                    // m
  double orbital_altitude = 400e3;                  // m
  double satellite_mass = 100.0;                    // kg
  double dt = 5.0;                                  // s

  double semi_major_axis() const { return earth_radius + orbital_altitude; }

  /// n = sqrt(mu / a^3), the angular rate of the reference orbit.
  double mean_motion() const;

  /// Throws std::domain_error on non-physical values.
  void validate() const;
};

/// Mean motion for a circular orbit at `altitude` above the surface.
double mean_motion(double altitude, const OrbitConstants& constants);

/// Discrete-time linear system x_{t+1} = A x_t + B u_t for one robot.
struct LinearDynamics {
  int state_dim = 0;
  int control_dim = 0;
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
};

/// Continuous-time Hill-Clohessy-Wiltshire system matrices, state
/// (x, y, z, vx, vy, vz), control thrust (Fx, Fy, Fz) in Newtons.
void continuous_hcw(const OrbitConstants& constants, Eigen::MatrixXd& A_c,
                    Eigen::MatrixXd& B_c);

/// Exact zero-order-hold discretization of the HCW equations over dt.
/// A = exp(A_c dt), B = (integral of exp(A_c s) ds over [0, dt]) B_c.
LinearDynamics hcw_matrices(const OrbitConstants& constants);

/// Planar 4-state reduction (x, y, vx, vy): the out-of-plane axis of the HCW
/// system is decoupled and is dropped here.
LinearDynamics planar_dynamics(const OrbitConstants& constants);

/// The decoupled out-of-plane 2-state subsystem (z, vz).
LinearDynamics out_of_plane_dynamics(const OrbitConstants& constants);

/// Propagates stacked per-robot states under blockwise identical dynamics.
/// `x1` has N*state_dim entries; `controls` is (T-1) x (N*control_dim).
/// Returns the T-step trajectory with x_{t+1} = A x_t + B u_t per robot.
Trajectory propagate(const LinearDynamics& dynamics, const Eigen::VectorXd& x1,
                     const Eigen::MatrixXd& controls);

}  // namespace orbitgames
