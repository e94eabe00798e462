#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "nictl/errors.hpp"
#include "nictl/sim.hpp"
#include "sim_detail.hpp"

namespace nictl {

namespace {

struct ControllerRealization {
  Matrix A;
  Vector B;
  RowVector C;
  double D = 0.0;
};

ControllerRealization realize(const RationalTF& tf) {
  if (tf.degree() == 0) {
    return {Matrix(0, 0), Vector(0), RowVector(0), tf.num().front() / tf.den().front()};
  }
  const auto ss = to_state_space(tf);
  return {ss.A(), ss.B(), ss.C(), ss.D_ff()};
}

// z' = Acl z + bcl r,  u = ux z + ur r,  y = yx z + yr r
struct ClosedLoop {
  Matrix Acl;
  Vector bcl;
  RowVector ux, yx;
  double ur = 0.0, yr = 0.0;
};

ClosedLoop assemble(const StateSpace& plant, const RationalTF& ctrl) {
  const auto k = realize(ctrl);
  const auto n = plant.order();
  const auto nk = k.A.rows();
  const double loop = 1.0 - k.D * plant.D_ff();
  if (std::abs(loop) <= 1e-12) throw IllPosedLoop("direct-feedthrough product equals 1");
  const double s = 1.0 / loop;

  ClosedLoop cl;
  cl.ux = RowVector::Zero(n + nk);
  cl.ux.head(n) = s * k.D * plant.C();
  if (nk > 0) cl.ux.tail(nk) = s * k.C;
  cl.ur = s * k.D;
  cl.yx = plant.D_ff() * cl.ux;
  cl.yx.head(n) += plant.C();
  cl.yr = plant.D_ff() * cl.ur;

  cl.Acl = Matrix::Zero(n + nk, n + nk);
  cl.Acl.topLeftCorner(n, n) = plant.A();
  if (nk > 0) cl.Acl.bottomRightCorner(nk, nk) = k.A;
  cl.Acl.topRows(n) += plant.B() * cl.ux;
  if (nk > 0) cl.Acl.bottomRows(nk) += k.B * cl.yx;
  cl.bcl = Vector::Zero(n + nk);
  cl.bcl.head(n) = plant.B() * cl.ur;
  if (nk > 0) cl.bcl.tail(nk) = k.B * (1.0 + cl.yr);
  return cl;
}

}  // namespace

Matrix closed_loop_matrix(const StateSpace& plant, const RationalTF& ctrl) { return assemble(plant, ctrl).Acl; }

Trajectory simulate_linear_loop(const StateSpace& plant, const RationalTF& ctrl, const SimConfig& cfg) {
  cfg.validate();
  const auto cl = assemble(plant, ctrl);
  const auto n = plant.order();
  const auto N = cl.Acl.rows();
  const auto nk = N - n;
  if (cfg.x0.size() != n) throw DimensionMismatch("sim.x0 does not match the plant order");
  if (!cfg.controller_x0.empty() && static_cast<Eigen::Index>(cfg.controller_x0.size()) != nk)
    throw DimensionMismatch("sim.controller_x0 does not match the controller order");

  // exp([[Acl, bcl], [0, 0]] dt) = [[Phi, Gamma], [0, 1]]
  Matrix aug = Matrix::Zero(N + 1, N + 1);
  aug.topLeftCorner(N, N) = cl.Acl * cfg.dt;
  aug.topRightCorner(N, 1) = cl.bcl * cfg.dt;
  const Matrix E = aug.exp();
  const Matrix Phi = E.topLeftCorner(N, N);
  const Vector Gam = E.topRightCorner(N, 1);

  Vector z = Vector::Zero(N);
  z.head(n) = cfg.x0;
  for (Eigen::Index i = 0; i < nk; ++i) z(n + i) = cfg.controller_x0.empty() ? 0.0 : cfg.controller_x0[static_cast<std::size_t>(i)];

  Trajectory traj;
  for (Eigen::Index i = 0; i < nk; ++i) traj.controller_labels.push_back("x_k" + std::to_string(i + 1));
  const long steps = cfg.steps();
  detail::reserve(traj, steps, cfg.record_every);
  for (long k = 0; k <= steps; ++k) {
    if (k % cfg.record_every == 0 || k == steps) {
      const double y = cl.yx.dot(z) + cl.yr * cfg.r;
      traj.times.push_back(static_cast<double>(k) * cfg.dt);
      traj.plant_states.push_back(z.head(n));
      traj.controller_states.emplace_back(z.data() + n, z.data() + N);
      traj.modes.emplace_back();
      traj.e.push_back(cfg.r + y);
      traj.u.push_back(cl.ux.dot(z) + cl.ur * cfg.r);
      traj.y.push_back(y);
    }
    if (k == steps) break;
    z = Phi * z + Gam * cfg.r;
    detail::guard_divergence(z, cfg.tolerances.divergence, static_cast<double>(k + 1) * cfg.dt);
  }
  return traj;
}

}  // namespace nictl
