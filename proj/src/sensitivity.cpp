#include "orbitgames/sensitivity.hpp"

#include <stdexcept>
#include <string>

#include <Eigen/SparseLU>

namespace orbitgames {

namespace {
// Above this size the dense factorization (and its pivot diagnostics) is
// replaced by sparse LU.
constexpr int kDenseSensitivityLimit = 1500;
}  // namespace

SensitivityResult solution_sensitivity(const GameSpec& spec,
                                       const ThetaParams& theta,
                                       const SolutionVector& z_star,
                                       double residual_tol) {
  const Eigen::VectorXd residual = kkt_residual(spec, theta, z_star);
  const double res_inf = residual.lpNorm<Eigen::Infinity>();
  if (res_inf > residual_tol) {
    throw std::invalid_argument(
        "solution_sensitivity: iterate has residual " + std::to_string(res_inf) +
        ", not a solution at tolerance " + std::to_string(residual_tol));
  }

  SensitivityResult out;
  out.theta_layout = ThetaLayout::from(spec, theta);
  const Eigen::MatrixXd J_theta =
      kkt_jacobian_theta(spec, theta, z_star, out.theta_layout);
  const int n = z_star.layout.size;

  if (n <= kDenseSensitivityLimit) {
    const Eigen::MatrixXd J = kkt_jacobian_dense(spec, theta, z_star);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
    out.conditioning = pivots.minCoeff();
    const double pivot_floor = 1e-12 * pivots.maxCoeff();
    if (out.conditioning > pivot_floor) {
      out.method = SensitivityMethod::kDirect;
      out.dz_dtheta = lu.solve(-J_theta);
    } else {
      out.method = SensitivityMethod::kLeastSquares;
      out.dz_dtheta =
          J.completeOrthogonalDecomposition().solve(-J_theta);
    }
    return out;
  }

  Eigen::SparseMatrix<double> J = kkt_jacobian_sparse(spec, theta, z_star);
  J.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(J);
  if (lu.info() != Eigen::Success) {
    throw std::runtime_error("solution_sensitivity: sparse factorization failed");
  }
  out.method = SensitivityMethod::kDirect;
  out.conditioning = 0.0;  // pivot magnitudes not exposed by the sparse path
  out.dz_dtheta = lu.solve(Eigen::MatrixXd(-J_theta));
  return out;
}

double trajectory_loss(const GameSpec& spec, const SolutionVector& z_star,
                       const Trajectory& expert, bool positions_only) {
  expert.check_shape(spec.num_robots, spec.state_dim(), spec.control_dim(),
                     spec.horizon);
  const Trajectory traj = unpack_trajectory(spec, z_star);
  if (!positions_only) {
    return (traj.states - expert.states).squaredNorm();
  }
  double loss = 0.0;
  const int sd = spec.state_dim();
  const int pd = spec.position_dim();
  for (int i = 0; i < spec.num_robots; ++i) {
    loss += (traj.states.middleCols(i * sd, pd) -
             expert.states.middleCols(i * sd, pd))
                .squaredNorm();
  }
  return loss;
}

Eigen::VectorXd loss_gradient(const GameSpec& spec, const SolutionVector& z_star,
                              const SensitivityResult& sensitivity,
                              const Trajectory& expert, bool positions_only) {
  expert.check_shape(spec.num_robots, spec.state_dim(), spec.control_dim(),
                     spec.horizon);
  const SolutionLayout& L = z_star.layout;
  const int sd = spec.state_dim();
  const int limit = positions_only ? spec.position_dim() : sd;

  // 2 (x - expert)^T restricted to the state rows of z (t >= 2; the initial
  // state is fixed data with zero sensitivity).
  Eigen::VectorXd seed = Eigen::VectorXd::Zero(L.size);
  for (int i = 0; i < spec.num_robots; ++i) {
    for (int t = 2; t <= spec.horizon; ++t) {
      for (int k = 0; k < limit; ++k) {
        const int row = L.x_index(i, t, k);
        seed(row) = 2.0 * (z_star.z(row) - expert.states(t - 1, i * sd + k));
      }
    }
  }
  return sensitivity.dz_dtheta.transpose() * seed;
}

}  // namespace orbitgames
