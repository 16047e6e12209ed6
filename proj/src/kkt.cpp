#include "orbitgames/kkt.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace orbitgames {

SolutionLayout index_map(const GameSpec& spec) {
  SolutionLayout layout;
  layout.num_robots = spec.num_robots;
  layout.horizon = spec.horizon;
  layout.state_dim = spec.state_dim();
  layout.control_dim = spec.control_dim();
  layout.num_pairs = spec.num_pairs();

  const int steps = spec.horizon - 1;
  const int x_total = spec.num_robots * spec.state_dim() * steps;
  const int u_total = spec.num_robots * spec.control_dim() * steps;
  const int w_total = x_total;
  const int v_total = spec.num_pairs() * steps;
  const int lam_total = u_total;

  layout.x_offset = 0;
  layout.u_offset = x_total;
  layout.w_offset = layout.u_offset + u_total;
  layout.v_offset = layout.w_offset + w_total;
  layout.lam_hi_offset = layout.v_offset + v_total;
  layout.lam_lo_offset = layout.lam_hi_offset + lam_total;
  layout.size = layout.lam_lo_offset + lam_total;
  return layout;
}

Eigen::VectorXd SolutionVector::state(int robot, int t) const {
  if (t < 2 || t > layout.horizon) {
    throw std::out_of_range("SolutionVector::state: t must be in [2, T]");
  }
  return z.segment(layout.x_index(robot, t, 0), layout.state_dim);
}

Eigen::VectorXd SolutionVector::control(int robot, int t) const {
  if (t < 1 || t > layout.horizon - 1) {
    throw std::out_of_range("SolutionVector::control: t must be in [1, T-1]");
  }
  return z.segment(layout.u_index(robot, t, 0), layout.control_dim);
}

Trajectory unpack_trajectory(const GameSpec& spec, const SolutionVector& solution) {
  const SolutionLayout& layout = solution.layout;
  Trajectory traj;
  traj.num_robots = spec.num_robots;
  traj.state_dim = spec.state_dim();
  traj.control_dim = spec.control_dim();
  traj.states.resize(spec.horizon, spec.num_robots * spec.state_dim());
  traj.controls.resize(spec.horizon - 1, spec.num_robots * spec.control_dim());
  traj.states.row(0) = spec.initial_state.transpose();
  for (int i = 0; i < spec.num_robots; ++i) {
    for (int t = 2; t <= spec.horizon; ++t) {
      traj.states.row(t - 1).segment(i * spec.state_dim(), spec.state_dim()) =
          solution.z.segment(layout.x_index(i, t, 0), spec.state_dim());
    }
    for (int t = 1; t <= spec.horizon - 1; ++t) {
      traj.controls.row(t - 1).segment(i * spec.control_dim(), spec.control_dim()) =
          solution.z.segment(layout.u_index(i, t, 0), spec.control_dim());
    }
  }
  return traj;
}

void pack_trajectory(const Trajectory& traj, SolutionVector& solution) {
  const SolutionLayout& layout = solution.layout;
  traj.check_shape(layout.num_robots, layout.state_dim, layout.control_dim,
                   layout.horizon);
  for (int i = 0; i < layout.num_robots; ++i) {
    for (int t = 2; t <= layout.horizon; ++t) {
      solution.z.segment(layout.x_index(i, t, 0), layout.state_dim) =
          traj.states.row(t - 1).segment(i * layout.state_dim, layout.state_dim);
    }
    for (int t = 1; t <= layout.horizon - 1; ++t) {
      solution.z.segment(layout.u_index(i, t, 0), layout.control_dim) =
          traj.controls.row(t - 1).segment(i * layout.control_dim,
                                           layout.control_dim);
    }
  }
}

double fischer_burmeister(double a, double b) {
  return a + b - std::sqrt(a * a + b * b);
}

void fischer_burmeister_partials(double a, double b, double& da, double& db) {
  const double r = std::sqrt(a * a + b * b + kFbEpsilon);
  da = 1.0 - a / r;
  db = 1.0 - b / r;
}

ThetaLayout ThetaLayout::from(const GameSpec& spec, const ThetaParams& theta) {
  ThetaLayout layout;
  for (int p = 0; p < spec.num_pairs(); ++p) {
    if (p < static_cast<int>(theta.omega_learnable.size()) &&
        theta.omega_learnable[p]) {
      layout.entries.push_back({Kind::kOmega, p});
    }
    if (p < static_cast<int>(theta.rho_learnable.size()) &&
        theta.rho_learnable[p]) {
      layout.entries.push_back({Kind::kRho, p});
    }
  }
  for (int i = 0; i < spec.num_robots; ++i) {
    if (i < static_cast<int>(theta.xi_learnable.size()) && theta.xi_learnable[i]) {
      layout.entries.push_back({Kind::kXi, i});
    }
  }
  return layout;
}

Eigen::VectorXd ThetaLayout::natural(const ThetaParams& theta,
                                     const GameSpec& spec) const {
  Eigen::VectorXd values(size());
  for (int e = 0; e < size(); ++e) {
    switch (entries[e].kind) {
      case Kind::kOmega: values(e) = theta.omega(entries[e].index); break;
      case Kind::kRho: values(e) = theta.rho(entries[e].index); break;
      case Kind::kXi: values(e) = theta.xi(spec, entries[e].index); break;
    }
  }
  return values;
}

void ThetaLayout::apply_natural(const Eigen::VectorXd& values,
                                const GameSpec& spec, ThetaParams& theta) const {
  if (values.size() != size()) {
    throw std::invalid_argument("ThetaLayout::apply_natural: size mismatch");
  }
  for (int e = 0; e < size(); ++e) {
    switch (entries[e].kind) {
      case Kind::kOmega:
        theta.omega(entries[e].index) = values(e);
        break;
      case Kind::kRho:
        theta.rho(entries[e].index) = values(e);
        break;
      case Kind::kXi:
        if (!theta.xi_override) theta.xi_override = spec.control_weight;
        (*theta.xi_override)(entries[e].index) = values(e);
        break;
    }
  }
}

Eigen::VectorXd ThetaLayout::to_internal(const Eigen::VectorXd& natural) const {
  Eigen::VectorXd internal = natural;
  for (int e = 0; e < size(); ++e) {
    if (entries[e].kind == Kind::kRho) internal(e) = std::log(natural(e));
  }
  return internal;
}

Eigen::VectorXd ThetaLayout::from_internal(const Eigen::VectorXd& internal) const {
  Eigen::VectorXd natural = internal;
  for (int e = 0; e < size(); ++e) {
    if (entries[e].kind == Kind::kRho) natural(e) = std::exp(internal(e));
  }
  return natural;
}

Eigen::VectorXd ThetaLayout::internal_scaling(const Eigen::VectorXd& natural) const {
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(size());
  for (int e = 0; e < size(); ++e) {
    if (entries[e].kind == Kind::kRho) scale(e) = natural(e);
  }
  return scale;
}

std::string ThetaLayout::name(int entry, const GameSpec& spec) const {
  const Entry& e = entries[entry];
  switch (e.kind) {
    case Kind::kOmega:
      return "omega_" + std::to_string(spec.pairs[e.index].i + 1) + "_" +
             std::to_string(spec.pairs[e.index].j + 1);
    case Kind::kRho:
      return "rho_" + std::to_string(spec.pairs[e.index].i + 1) + "_" +
             std::to_string(spec.pairs[e.index].j + 1);
    case Kind::kXi:
      return "xi_" + std::to_string(e.index + 1);
  }
  return "";
}

namespace {

struct AssemblyContext {
  const GameSpec& spec;
  const ThetaParams& theta;
  const SolutionVector& solution;
  Eigen::VectorXd alphas;

  AssemblyContext(const GameSpec& s, const ThetaParams& th, const SolutionVector& sol)
      : spec(s), theta(th), solution(sol), alphas(reference_angles(s)) {
    if (sol.z.size() != sol.layout.size) {
      throw std::invalid_argument("kkt: solution vector does not match layout");
    }
    th.validate(s);
  }

  Eigen::Vector2d planar_position(int robot, int t) const {
    // t >= 2 always: hyperplane constraints exclude the fixed initial state.
    return solution.z.segment<2>(solution.layout.x_index(robot, t, 0));
  }

  double hyperplane_angle(int pair, int t) const {
    return alphas(pair) + theta.omega(pair) * (t - 1) * spec.dt;
  }

  double h_value(int pair, int t, const Eigen::Vector2d& n) const {
    const Eigen::Vector2d diff = planar_position(spec.pairs[pair].i, t) -
                                 planar_position(spec.pairs[pair].j, t);
    return n.dot(diff) - theta.rho(pair);
  }
};

}  // namespace

Eigen::VectorXd kkt_residual(const GameSpec& spec, const ThetaParams& theta,
                             const SolutionVector& solution) {
  const AssemblyContext ctx(spec, theta, solution);
  const SolutionLayout& L = solution.layout;
  const Eigen::VectorXd& z = solution.z;
  const int T = spec.horizon;
  const int sd = spec.state_dim();
  const int cd = spec.control_dim();
  const int pd = spec.position_dim();
  const Eigen::MatrixXd& A = spec.dynamics.A;
  const Eigen::MatrixXd& B = spec.dynamics.B;

  Eigen::VectorXd F = Eigen::VectorXd::Zero(L.size);

  for (int i = 0; i < spec.num_robots; ++i) {
    const double xi = theta.xi(spec, i);

    // Stationarity w.r.t. states, t = 2..T.
    for (int t = 2; t <= T; ++t) {
      auto rows = F.segment(L.x_index(i, t, 0), sd);
      rows -= z.segment(L.w_index(i, t - 1, 0), sd);
      if (t <= T - 1) {
        rows += A.transpose() * z.segment(L.w_index(i, t, 0), sd);
      } else {
        const Eigen::VectorXd p_final = z.segment(L.x_index(i, T, 0), pd);
        rows.head(pd) += 2.0 * (p_final - spec.goal_positions[i]);
      }
    }

    // Stationarity w.r.t. controls, t = 1..T-1.
    for (int t = 1; t <= T - 1; ++t) {
      auto rows = F.segment(L.u_index(i, t, 0), cd);
      rows = 2.0 * xi * z.segment(L.u_index(i, t, 0), cd);
      rows += B.transpose() * z.segment(L.w_index(i, t, 0), sd);
      rows -= z.segment(L.lam_hi_index(i, t, 0), cd);
      rows += z.segment(L.lam_lo_index(i, t, 0), cd);
    }

    // Dynamics equality G_t = x_{t+1} - A x_t - B u_t, t = 1..T-1.
    for (int t = 1; t <= T - 1; ++t) {
      auto rows = F.segment(L.w_index(i, t, 0), sd);
      rows = z.segment(L.x_index(i, t + 1, 0), sd);
      if (t == 1) {
        rows -= A * spec.initial_state_of(i);
      } else {
        rows -= A * z.segment(L.x_index(i, t, 0), sd);
      }
      rows -= B * z.segment(L.u_index(i, t, 0), cd);
    }

    // Thrust-limit complementarity.
    for (int t = 1; t <= T - 1; ++t) {
      for (int k = 0; k < cd; ++k) {
        const double u = z(L.u_index(i, t, k));
        F(L.lam_hi_index(i, t, k)) = fischer_burmeister(
            spec.thrust_limit + u, z(L.lam_hi_index(i, t, k)));
        F(L.lam_lo_index(i, t, k)) = fischer_burmeister(
            spec.thrust_limit - u, z(L.lam_lo_index(i, t, k)));
      }
    }
  }

  // Shared hyperplane terms: complementarity rows plus the coupled
  // stationarity contributions for both robots of each pair.
  for (int p = 0; p < spec.num_pairs(); ++p) {
    const RobotPair& pair = spec.pairs[p];
    for (int t = 2; t <= T; ++t) {
      const double psi = ctx.hyperplane_angle(p, t);
      const Eigen::Vector2d n(std::cos(psi), std::sin(psi));
      const double v = z(L.v_index(p, t));
      F(L.v_index(p, t)) = fischer_burmeister(ctx.h_value(p, t, n), v);
      F.segment<2>(L.x_index(pair.i, t, 0)) -= v * n;
      F.segment<2>(L.x_index(pair.j, t, 0)) += v * n;
    }
  }

  return F;
}

LagrangianGradient lagrangian_gradient(const GameSpec& spec,
                                       const ThetaParams& theta,
                                       const SolutionVector& solution,
                                       int robot) {
  const Eigen::VectorXd F = kkt_residual(spec, theta, solution);
  const SolutionLayout& L = solution.layout;
  LagrangianGradient grad;
  grad.grad_x.resize(spec.horizon - 1, spec.state_dim());
  grad.grad_u.resize(spec.horizon - 1, spec.control_dim());
  for (int t = 2; t <= spec.horizon; ++t) {
    grad.grad_x.row(t - 2) =
        F.segment(L.x_index(robot, t, 0), spec.state_dim()).transpose();
  }
  for (int t = 1; t <= spec.horizon - 1; ++t) {
    grad.grad_u.row(t - 1) =
        F.segment(L.u_index(robot, t, 0), spec.control_dim()).transpose();
  }
  return grad;
}

void kkt_jacobian_triplets(const GameSpec& spec, const ThetaParams& theta,
                           const SolutionVector& solution,
                           std::vector<Eigen::Triplet<double>>& triplets) {
  const AssemblyContext ctx(spec, theta, solution);
  const SolutionLayout& L = solution.layout;
  const Eigen::VectorXd& z = solution.z;
  const int T = spec.horizon;
  const int sd = spec.state_dim();
  const int cd = spec.control_dim();
  const int pd = spec.position_dim();
  const Eigen::MatrixXd& A = spec.dynamics.A;
  const Eigen::MatrixXd& B = spec.dynamics.B;

  triplets.clear();
  triplets.reserve(static_cast<size_t>(L.size) * 12);

  // Explicit zero diagonal keeps the pattern complete for J + delta*I.
  for (int r = 0; r < L.size; ++r) triplets.emplace_back(r, r, 0.0);

  for (int i = 0; i < spec.num_robots; ++i) {
    const double xi = theta.xi(spec, i);

    for (int t = 2; t <= T; ++t) {
      // d(stationarity_x)/dw.
      for (int k = 0; k < sd; ++k) {
        triplets.emplace_back(L.x_index(i, t, k), L.w_index(i, t - 1, k), -1.0);
      }
      if (t <= T - 1) {
        for (int k = 0; k < sd; ++k) {
          for (int l = 0; l < sd; ++l) {
            if (A(l, k) != 0.0) {
              triplets.emplace_back(L.x_index(i, t, k), L.w_index(i, t, l),
                                    A(l, k));
            }
          }
        }
      } else {
        // Terminal cost Hessian on position entries.
        for (int k = 0; k < pd; ++k) {
          triplets.emplace_back(L.x_index(i, T, k), L.x_index(i, T, k), 2.0);
        }
      }
    }

    for (int t = 1; t <= T - 1; ++t) {
      for (int k = 0; k < cd; ++k) {
        const int row = L.u_index(i, t, k);
        triplets.emplace_back(row, row, 2.0 * xi);
        for (int l = 0; l < sd; ++l) {
          if (B(l, k) != 0.0) {
            triplets.emplace_back(row, L.w_index(i, t, l), B(l, k));
          }
        }
        triplets.emplace_back(row, L.lam_hi_index(i, t, k), -1.0);
        triplets.emplace_back(row, L.lam_lo_index(i, t, k), 1.0);
      }

      // Dynamics rows.
      for (int k = 0; k < sd; ++k) {
        const int row = L.w_index(i, t, k);
        triplets.emplace_back(row, L.x_index(i, t + 1, k), 1.0);
        if (t >= 2) {
          for (int l = 0; l < sd; ++l) {
            if (A(k, l) != 0.0) {
              triplets.emplace_back(row, L.x_index(i, t, l), -A(k, l));
            }
          }
        }
        for (int l = 0; l < cd; ++l) {
          if (B(k, l) != 0.0) {
            triplets.emplace_back(row, L.u_index(i, t, l), -B(k, l));
          }
        }
      }

      // Thrust complementarity rows.
      for (int k = 0; k < cd; ++k) {
        const double u = z(L.u_index(i, t, k));
        double da, db;
        fischer_burmeister_partials(spec.thrust_limit + u,
                                    z(L.lam_hi_index(i, t, k)), da, db);
        triplets.emplace_back(L.lam_hi_index(i, t, k), L.u_index(i, t, k), da);
        triplets.emplace_back(L.lam_hi_index(i, t, k), L.lam_hi_index(i, t, k), db);
        fischer_burmeister_partials(spec.thrust_limit - u,
                                    z(L.lam_lo_index(i, t, k)), da, db);
        triplets.emplace_back(L.lam_lo_index(i, t, k), L.u_index(i, t, k), -da);
        triplets.emplace_back(L.lam_lo_index(i, t, k), L.lam_lo_index(i, t, k), db);
      }
    }
  }

  for (int p = 0; p < spec.num_pairs(); ++p) {
    const RobotPair& pair = spec.pairs[p];
    for (int t = 2; t <= T; ++t) {
      const double psi = ctx.hyperplane_angle(p, t);
      const Eigen::Vector2d n(std::cos(psi), std::sin(psi));
      const int vrow = L.v_index(p, t);
      const double v = z(vrow);

      double da, db;
      fischer_burmeister_partials(ctx.h_value(p, t, n), v, da, db);
      for (int k = 0; k < 2; ++k) {
        triplets.emplace_back(vrow, L.x_index(pair.i, t, k), da * n(k));
        triplets.emplace_back(vrow, L.x_index(pair.j, t, k), -da * n(k));
        // Stationarity rows pick up the shared multiplier column.
        triplets.emplace_back(L.x_index(pair.i, t, k), vrow, -n(k));
        triplets.emplace_back(L.x_index(pair.j, t, k), vrow, n(k));
      }
      triplets.emplace_back(vrow, vrow, db);
    }
  }
}

Eigen::MatrixXd kkt_jacobian_dense(const GameSpec& spec, const ThetaParams& theta,
                                   const SolutionVector& solution) {
  std::vector<Eigen::Triplet<double>> triplets;
  kkt_jacobian_triplets(spec, theta, solution, triplets);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(solution.layout.size,
                                            solution.layout.size);
  for (const auto& t : triplets) J(t.row(), t.col()) += t.value();
  return J;
}

Eigen::SparseMatrix<double> kkt_jacobian_sparse(const GameSpec& spec,
                                                const ThetaParams& theta,
                                                const SolutionVector& solution) {
  std::vector<Eigen::Triplet<double>> triplets;
  kkt_jacobian_triplets(spec, theta, solution, triplets);
  Eigen::SparseMatrix<double> J(solution.layout.size, solution.layout.size);
  J.setFromTriplets(triplets.begin(), triplets.end());
  return J;
}

Eigen::MatrixXd kkt_jacobian_theta(const GameSpec& spec, const ThetaParams& theta,
                                   const SolutionVector& solution,
                                   const ThetaLayout& layout) {
  const AssemblyContext ctx(spec, theta, solution);
  const SolutionLayout& L = solution.layout;
  const Eigen::VectorXd& z = solution.z;
  const int T = spec.horizon;
  const int cd = spec.control_dim();

  Eigen::MatrixXd Jt = Eigen::MatrixXd::Zero(L.size, layout.size());

  for (int e = 0; e < layout.size(); ++e) {
    const ThetaLayout::Entry& entry = layout.entries[e];
    switch (entry.kind) {
      case ThetaLayout::Kind::kOmega: {
        const int p = entry.index;
        const RobotPair& pair = spec.pairs[p];
        for (int t = 2; t <= T; ++t) {
          const double psi = ctx.hyperplane_angle(p, t);
          const Eigen::Vector2d n(std::cos(psi), std::sin(psi));
          const Eigen::Vector2d n_perp(-std::sin(psi), std::cos(psi));
          const double scale = (t - 1) * spec.dt;  // d(psi)/d(omega)
          const double v = z(L.v_index(p, t));

          double da, db;
          fischer_burmeister_partials(ctx.h_value(p, t, n), v, da, db);
          const Eigen::Vector2d diff = ctx.planar_position(pair.i, t) -
                                       ctx.planar_position(pair.j, t);
          Jt(L.v_index(p, t), e) += da * scale * n_perp.dot(diff);
          for (int k = 0; k < 2; ++k) {
            Jt(L.x_index(pair.i, t, k), e) -= v * scale * n_perp(k);
            Jt(L.x_index(pair.j, t, k), e) += v * scale * n_perp(k);
          }
        }
        break;
      }
      case ThetaLayout::Kind::kRho: {
        const int p = entry.index;
        for (int t = 2; t <= T; ++t) {
          const double psi = ctx.hyperplane_angle(p, t);
          const Eigen::Vector2d n(std::cos(psi), std::sin(psi));
          double da, db;
          fischer_burmeister_partials(ctx.h_value(p, t, n), z(L.v_index(p, t)),
                                      da, db);
          Jt(L.v_index(p, t), e) -= da;  // dH/drho = -1
        }
        break;
      }
      case ThetaLayout::Kind::kXi: {
        const int i = entry.index;
        for (int t = 1; t <= T - 1; ++t) {
          for (int k = 0; k < cd; ++k) {
            Jt(L.u_index(i, t, k), e) += 2.0 * z(L.u_index(i, t, k));
          }
        }
        break;
      }
    }
  }
  return Jt;
}

}  // namespace orbitgames
