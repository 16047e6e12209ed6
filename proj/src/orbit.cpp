#include "orbitgames/orbit.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace orbitgames {

namespace {

// 1 - cos(x) without cancellation.
double one_minus_cos(double x) {
  const double s = std::sin(0.5 * x);
  return 2.0 * s * s;
}

// x - sin(x); series for small arguments where the direct form cancels.
double x_minus_sin(double x) {
  if (std::abs(x) < 1e-3) {
    const double x2 = x * x;
    return x * x2 / 6.0 *
           (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
  }
  return x - std::sin(x);
}

}  // namespace

double OrbitConstants::mean_motion() const {
  validate();
  const double a = semi_major_axis();
  return std::sqrt(gravitational_parameter / (a * a * a));
}

void OrbitConstants::validate() const {
  if (!(gravitational_parameter > 0.0)) {
    throw std::domain_error("OrbitConstants: gravitational_parameter must be > 0");
  }
  if (!(earth_radius > 0.0)) {
    throw std::domain_error("OrbitConstants: earth_radius must be > 0");
  }
  if (!(orbital_altitude > 0.0)) {
    throw std::domain_error("OrbitConstants: orbital_altitude must be > 0");
  }
  if (!(satellite_mass > 0.0)) {
    throw std::domain_error("OrbitConstants: satellite_mass must be > 0");
  }
  if (!(dt > 0.0)) {
    throw std::domain_error("OrbitConstants: dt must be > 0");
  }
}

double mean_motion(double altitude, const OrbitConstants& constants) {
  if (!(altitude > 0.0)) {
    throw std::domain_error("mean_motion: altitude must be > 0");
  }
  const double a = constants.earth_radius + altitude;
  return std::sqrt(constants.gravitational_parameter / (a * a * a));
}

void continuous_hcw(const OrbitConstants& constants, Eigen::MatrixXd& A_c,
                    Eigen::MatrixXd& B_c) {
  constants.validate();
  const double n = constants.mean_motion();
  const double inv_m = 1.0 / constants.satellite_mass;

  A_c = Eigen::MatrixXd::Zero(6, 6);
  A_c(0, 3) = 1.0;
  A_c(1, 4) = 1.0;
  A_c(2, 5) = 1.0;
  A_c(3, 0) = 3.0 * n * n;
  A_c(3, 4) = 2.0 * n;
  A_c(4, 3) = -2.0 * n;
  A_c(5, 2) = -n * n;

  B_c = Eigen::MatrixXd::Zero(6, 3);
  B_c(3, 0) = inv_m;
  B_c(4, 1) = inv_m;
  B_c(5, 2) = inv_m;
}

LinearDynamics hcw_matrices(const OrbitConstants& constants) {
  constants.validate();
  const double n = constants.mean_motion();
  const double dt = constants.dt;
  const double nt = n * dt;
  const double s = std::sin(nt);
  const double c = std::cos(nt);
  const double omc = one_minus_cos(nt);   // 1 - cos(n dt)
  const double xms = x_minus_sin(nt);     // n dt - sin(n dt)
  const double inv_m = 1.0 / constants.satellite_mass;

  LinearDynamics dyn;
  dyn.state_dim = 6;
  dyn.control_dim = 3;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 6);
  // Position rows.
  A(0, 0) = 4.0 - 3.0 * c;
  A(0, 3) = s / n;
  A(0, 4) = 2.0 * omc / n;
  A(1, 0) = -6.0 * xms;
  A(1, 1) = 1.0;
  A(1, 3) = -2.0 * omc / n;
  A(1, 4) = (4.0 * s - 3.0 * nt) / n;
  A(2, 2) = c;
  A(2, 5) = s / n;
  // Velocity rows.
  A(3, 0) = 3.0 * n * s;
  A(3, 3) = c;
  A(3, 4) = 2.0 * s;
  A(4, 0) = -6.0 * n * omc;
  A(4, 3) = -2.0 * s;
  A(4, 4) = 4.0 * c - 3.0;
  A(5, 2) = -n * s;
  A(5, 5) = c;

  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(6, 3);
  B(0, 0) = omc / (n * n);
  B(0, 1) = 2.0 * xms / (n * n);
  B(1, 0) = -2.0 * xms / (n * n);
  B(1, 1) = 4.0 * omc / (n * n) - 1.5 * dt * dt;
  B(2, 2) = omc / (n * n);
  B(3, 0) = s / n;
  B(3, 1) = 2.0 * omc / n;
  B(4, 0) = -2.0 * omc / n;
  B(4, 1) = 4.0 * s / n - 3.0 * dt;
  B(5, 2) = s / n;
  B *= inv_m;

  dyn.A = A;
  dyn.B = B;
  return dyn;
}

LinearDynamics planar_dynamics(const OrbitConstants& constants) {
  const LinearDynamics full = hcw_matrices(constants);
  const int rows[4] = {0, 1, 3, 4};
  const int cols[2] = {0, 1};

  LinearDynamics dyn;
  dyn.state_dim = 4;
  dyn.control_dim = 2;
  dyn.A.resize(4, 4);
  dyn.B.resize(4, 2);
  for (int r = 0; r < 4; ++r) {
    for (int q = 0; q < 4; ++q) dyn.A(r, q) = full.A(rows[r], rows[q]);
    for (int q = 0; q < 2; ++q) dyn.B(r, q) = full.B(rows[r], cols[q]);
  }
  return dyn;
}

LinearDynamics out_of_plane_dynamics(const OrbitConstants& constants) {
  const LinearDynamics full = hcw_matrices(constants);
  const int rows[2] = {2, 5};

  LinearDynamics dyn;
  dyn.state_dim = 2;
  dyn.control_dim = 1;
  dyn.A.resize(2, 2);
  dyn.B.resize(2, 1);
  for (int r = 0; r < 2; ++r) {
    for (int q = 0; q < 2; ++q) dyn.A(r, q) = full.A(rows[r], rows[q]);
    dyn.B(r, 0) = full.B(rows[r], 2);
  }
  return dyn;
}

Trajectory propagate(const LinearDynamics& dynamics, const Eigen::VectorXd& x1,
                     const Eigen::MatrixXd& controls) {
  const int sd = dynamics.state_dim;
  const int cd = dynamics.control_dim;
  if (sd <= 0 || x1.size() % sd != 0) {
    throw std::invalid_argument("propagate: x1 size " + std::to_string(x1.size()) +
                                " is not a multiple of state_dim " +
                                std::to_string(sd));
  }
  const int num_robots = static_cast<int>(x1.size()) / sd;
  if (controls.cols() != static_cast<Eigen::Index>(num_robots) * cd) {
    throw std::invalid_argument("propagate: controls have " +
                                std::to_string(controls.cols()) +
                                " columns, expected " +
                                std::to_string(num_robots * cd));
  }
  const int horizon = static_cast<int>(controls.rows()) + 1;

  Trajectory traj;
  traj.num_robots = num_robots;
  traj.state_dim = sd;
  traj.control_dim = cd;
  traj.states.resize(horizon, num_robots * sd);
  traj.controls = controls;
  traj.states.row(0) = x1.transpose();
  for (int t = 1; t < horizon; ++t) {
    for (int i = 0; i < num_robots; ++i) {
      traj.states.row(t).segment(i * sd, sd) =
          dynamics.A * traj.states.row(t - 1).segment(i * sd, sd).transpose() +
          dynamics.B * controls.row(t - 1).segment(i * cd, cd).transpose();
    }
  }
  return traj;
}

}  // namespace orbitgames
