#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "orbitgames/game.hpp"

namespace orbitgames {

/// Block layout of the stacked MCP unknown z = [x, u, w, v, lam_hi, lam_lo].
///
/// x holds states for t = 2..T (x_1 is fixed data), robot-major then
/// time-major within a robot. u, w, lam_hi, lam_lo cover t = 1..T-1 per
/// robot. v holds one shared multiplier per (pair, t) instance, t = 2..T.
/// Residual rows use the same indices: stationarity rows sit at x/u entries,
/// dynamics equality rows at w entries, and complementarity rows at the
/// matching multiplier entries, so the system is square.
struct SolutionLayout {
  int num_robots = 0;
  int horizon = 0;
  int state_dim = 0;
  int control_dim = 0;
  int num_pairs = 0;

  int x_offset = 0;
  int u_offset = 0;
  int w_offset = 0;
  int v_offset = 0;
  int lam_hi_offset = 0;
  int lam_lo_offset = 0;
  int size = 0;

  int states_per_robot() const { return state_dim * (horizon - 1); }
  int controls_per_robot() const { return control_dim * (horizon - 1); }

  int x_index(int robot, int t, int k) const {  // t in [2, T]
    return x_offset + robot * states_per_robot() + (t - 2) * state_dim + k;
  }
  int u_index(int robot, int t, int k) const {  // t in [1, T-1]
    return u_offset + robot * controls_per_robot() + (t - 1) * control_dim + k;
  }
  int w_index(int robot, int t, int k) const {  // t in [1, T-1]
    return w_offset + robot * states_per_robot() + (t - 1) * state_dim + k;
  }
  int v_index(int pair, int t) const {  // t in [2, T]
    return v_offset + pair * (horizon - 1) + (t - 2);
  }
  int lam_hi_index(int robot, int t, int k) const {
    return lam_hi_offset + robot * controls_per_robot() + (t - 1) * control_dim + k;
  }
  int lam_lo_index(int robot, int t, int k) const {
    return lam_lo_offset + robot * controls_per_robot() + (t - 1) * control_dim + k;
  }
};

/// Deterministic block offsets for a spec.
SolutionLayout index_map(const GameSpec& spec);

/// The stacked MCP unknown together with its layout.
struct SolutionVector {
  SolutionLayout layout;
  Eigen::VectorXd z;

  Eigen::VectorXd state(int robot, int t) const;    // t in [1, T] (t=1 throws)
  Eigen::VectorXd control(int robot, int t) const;  // t in [1, T-1]
};

/// Expands the state/control blocks of z into a Trajectory (x_1 comes from
/// the spec). Inverse of pack_trajectory for the x/u blocks.
Trajectory unpack_trajectory(const GameSpec& spec, const SolutionVector& solution);

/// Writes a trajectory's states (t >= 2) and controls into z, leaving
/// multiplier blocks untouched.
void pack_trajectory(const Trajectory& traj, SolutionVector& solution);

/// Fischer-Burmeister complementarity function
/// phi(a, b) = a + b - sqrt(a^2 + b^2); zero iff a >= 0, b >= 0, a*b = 0.
double fischer_burmeister(double a, double b);

/// Partial derivatives of phi; smoothed with kFbEpsilon inside the square
/// root so the kink at the origin has a well-defined generalized derivative.
void fischer_burmeister_partials(double a, double b, double& da, double& db);

inline constexpr double kFbEpsilon = 1e-10;

/// Map from learnable theta entries to a flat parameter vector. Natural
/// units are (rad/s, m); internal coordinates replace rho by log(rho) so
/// gradient steps preserve positivity.
struct ThetaLayout {
  enum class Kind { kOmega, kRho, kXi };
  struct Entry {
    Kind kind;
    int index;  // pair index for omega/rho, robot index for xi
  };
  std::vector<Entry> entries;

  static ThetaLayout from(const GameSpec& spec, const ThetaParams& theta);

  int size() const { return static_cast<int>(entries.size()); }
  Eigen::VectorXd natural(const ThetaParams& theta, const GameSpec& spec) const;
  void apply_natural(const Eigen::VectorXd& values, const GameSpec& spec,
                     ThetaParams& theta) const;
  Eigen::VectorXd to_internal(const Eigen::VectorXd& natural) const;
  Eigen::VectorXd from_internal(const Eigen::VectorXd& internal) const;
  /// d(natural)/d(internal) as a diagonal, evaluated at `natural`.
  Eigen::VectorXd internal_scaling(const Eigen::VectorXd& natural) const;
  std::string name(int entry, const GameSpec& spec) const;
};

/// Stationarity blocks of one robot's Lagrangian.
struct LagrangianGradient {
  Eigen::MatrixXd grad_x;  // (T-1) x state_dim, rows for t = 2..T
  Eigen::MatrixXd grad_u;  // (T-1) x control_dim, rows for t = 1..T-1
};

LagrangianGradient lagrangian_gradient(const GameSpec& spec,
                                       const ThetaParams& theta,
                                       const SolutionVector& solution,
                                       int robot);

/// Full KKT residual F(z; theta): raw stationarity and equality blocks,
/// Fischer-Burmeister values for every complementarity pair.
Eigen::VectorXd kkt_residual(const GameSpec& spec, const ThetaParams& theta,
                             const SolutionVector& solution);

/// dF/dz as triplets (deterministic order) plus assembly into dense/sparse.
void kkt_jacobian_triplets(const GameSpec& spec, const ThetaParams& theta,
                           const SolutionVector& solution,
                           std::vector<Eigen::Triplet<double>>& triplets);
Eigen::MatrixXd kkt_jacobian_dense(const GameSpec& spec, const ThetaParams& theta,
                                   const SolutionVector& solution);
Eigen::SparseMatrix<double> kkt_jacobian_sparse(const GameSpec& spec,
                                                const ThetaParams& theta,
                                                const SolutionVector& solution);

/// dF/dtheta over the learnable entries (natural units), dense n x p.
Eigen::MatrixXd kkt_jacobian_theta(const GameSpec& spec, const ThetaParams& theta,
                                   const SolutionVector& solution,
                                   const ThetaLayout& layout);

}  // namespace orbitgames
