#include <cmath>

#include "nictl/errors.hpp"
#include "nictl/sim.hpp"
#include "sim_detail.hpp"

namespace nictl {

Trajectory simulate_higs_irc_loop(const StateSpace& plant, const HigsIrcParams& p, const SimConfig& cfg,
                                  const std::optional<LyapunovIrcCertificate>& cert) {
  cfg.validate();
  const auto n = plant.order();
  detail::require_loop_plant(plant, cfg, 1);
  if (cert && cert->matrix().rows() != n + 1) throw DimensionMismatch("certificate does not match plant order");

  const Matrix& A = plant.A();
  const Vector& B = plant.B();
  const RowVector& C = plant.C();
  const double kt = p.kappa_tilde();
  const double r = cfg.r;
  const double dt = cfg.dt;

  Vector x = cfg.x0;
  double xh = cfg.controller_x0.empty() ? 0.0 : cfg.controller_x0[0];
  auto e_of = [&](const Vector& xs) { return r + C.dot(xs); };
  xh = project_to_sector(e_of(x), xh, kt);

  Trajectory traj;
  traj.controller_labels = {"x_h"};
  const long steps = cfg.steps();
  detail::reserve(traj, steps, cfg.record_every);

  Vector z(n + 1);
  Vector k1(n + 1), k2(n + 1), k3(n + 1), k4(n + 1);
  auto integrator_flow = [&](const Vector& s, Vector& out) {
    const auto xs = s.head(n);
    out.head(n) = A * xs + B * s(n);
    out(n) = higs_irc_derivative(s(n), r + C.dot(xs), p);
  };
  auto gain_flow = [&](const Vector& s, Vector& out) {
    const auto xs = s.head(n);
    out.head(n) = A * xs + B * (kt * (r + C.dot(xs)));
    out(n) = 0.0;
  };

  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double e = e_of(x);
    const double e_dot = C.dot(A * x + B * xh);
    const HigsMode mode = determine_mode_irc(e, e_dot, xh, p, cfg.tolerances.boundary_rel);

    if (k % cfg.record_every == 0 || k == steps) {
      traj.times.push_back(t);
      traj.plant_states.push_back(x);
      traj.controller_states.push_back({xh});
      traj.modes.push_back({static_cast<int>(mode)});
      traj.e.push_back(e);
      traj.u.push_back(xh);
      traj.y.push_back(C.dot(x));
      traj.storage.push_back(storage_V_h(xh, p));
      if (cert) traj.lyapunov.push_back(lyapunov_W_irc(x, xh, *cert));
    }
    if (k == steps) break;

    z << x, xh;
    if (mode == HigsMode::Integrator) {
      detail::rk4_step(integrator_flow, z, dt, k1, k2, k3, k4);
      x = z.head(n);
      xh = z(n);
    } else {
      detail::rk4_step(gain_flow, z, dt, k1, k2, k3, k4);
      x = z.head(n);
      xh = higs_irc_gain_output(e_of(x), p);
    }
    xh = project_to_sector(e_of(x), xh, kt);

    Vector joint(n + 1);
    joint << x, xh;
    detail::guard_divergence(joint, cfg.tolerances.divergence, t + dt);
  }
  return traj;
}

}  // namespace nictl
