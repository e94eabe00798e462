#include <array>
#include <cmath>

#include "nictl/errors.hpp"
#include "nictl/sim.hpp"
#include "sim_detail.hpp"

namespace nictl {

namespace {

constexpr ModeTriple kAllIntegrator{HigsMode::Integrator, HigsMode::Integrator, HigsMode::Integrator};

// Restores the three sector constraints after a step. An element beyond its gain line is
// pinned to it (solved jointly with the loop, like gain mode); an element on the wrong side
// of zero is reset to zero. Updates the stored states to the resolved outputs.
Pii2LoopSignals project_pii2(double y, std::array<double, 3>& xs, const HigsPii2Params& p) {
  ModeTriple pinned = kAllIntegrator;
  const std::array<double, 3> gains{p.h1().k_h, p.h2().k_h, p.h3().k_h};
  Pii2LoopSignals sig{};
  for (int iter = 0; iter < 8; ++iter) {
    sig = resolve_pii2_error_signal(y, xs[0], xs[1], xs[2], pinned, p);
    const std::array<double, 3> inputs{sig.e, sig.e, sig.x_h2};
    const std::array<double, 3> outputs{sig.x_h1, sig.x_h2, sig.x_h3};
    bool changed = false;
    for (std::size_t i = 0; i < 3 && !changed; ++i) {
      if (pinned[i] == HigsMode::Gain || sector_contains(inputs[i], outputs[i], gains[i])) continue;
      const double edge = gains[i] * inputs[i];
      if (outputs[i] * edge > 0.0 && std::abs(outputs[i]) > std::abs(edge)) {
        pinned[i] = HigsMode::Gain;
      } else {
        xs[i] = 0.0;
      }
      changed = true;
    }
    if (!changed) break;
  }
  sig = resolve_pii2_error_signal(y, xs[0], xs[1], xs[2], pinned, p);
  xs = {sig.x_h1, sig.x_h2, sig.x_h3};
  return sig;
}

}  // namespace

Trajectory simulate_higs_pii2_loop(const StateSpace& plant, const HigsPii2Params& p, const SimConfig& cfg,
                                   const std::optional<LyapunovPii2Certificate>& cert) {
  cfg.validate();
  const auto n = plant.order();
  detail::require_loop_plant(plant, cfg, 3);
  if (cert && cert->matrix().rows() != n + 3) throw DimensionMismatch("certificate does not match plant order");
  {
    const double s = dc_gain(plant) + p.D();
    const double clearance = gain_sum_clearance(plant, p);
    if (clearance <= 1e-9 * std::max(1.0, std::abs(1.0 / s)))
      throw PreconditionViolation("gain-sum condition k_h1 + k_h2^2 + k_p != 1/(G(0) + D) is violated");
  }

  const Matrix& A = plant.A();
  const Vector& B = plant.B();
  const RowVector& C = plant.C();
  const double r = cfg.r;
  const double dt = cfg.dt;
  const double tol = cfg.tolerances.boundary_rel;

  Vector x = cfg.x0;
  std::array<double, 3> xs{0.0, 0.0, 0.0};
  if (!cfg.controller_x0.empty()) xs = {cfg.controller_x0[0], cfg.controller_x0[1], cfg.controller_x0[2]};
  auto y_of = [&](const Vector& v) { return r + C.dot(v); };
  Pii2LoopSignals sig = project_pii2(y_of(x), xs, p);

  Trajectory traj;
  traj.controller_labels = {"x_h1", "x_h2", "x_h3"};
  const long steps = cfg.steps();
  detail::reserve(traj, steps, cfg.record_every);

  ModeTriple modes = kAllIntegrator;
  Vector z(n + 3);
  Vector k1(n + 3), k2(n + 3), k3(n + 3), k4(n + 3);
  auto flow = [&](const Vector& s, Vector& out) {
    const auto xv = s.head(n);
    const auto q = resolve_pii2_error_signal(r + C.dot(xv), s(n), s(n + 1), s(n + 2), modes, p);
    out.head(n) = A * xv + B * q.u;
    out(n) = modes[0] == HigsMode::Integrator ? p.h1().omega_h * q.e : 0.0;
    out(n + 1) = modes[1] == HigsMode::Integrator ? p.h2().omega_h * q.e : 0.0;
    out(n + 2) = modes[2] == HigsMode::Integrator ? p.h3().omega_h * q.x_h2 : 0.0;
  };

  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double y_dot = C.dot(A * x + B * sig.u);

    // Modes and e_dot depend on each other; iterate from the previous modes to a consistent pair.
    ModeTriple candidate = modes;
    for (int iter = 0; iter < 8; ++iter) {
      const auto rates = pii2_rates(y_dot, sig, candidate, p);
      const auto next = higs_pii2_mode_update(sig.e, rates.e_dot, xs[0], xs[1], xs[2], p, tol);
      if (next == candidate) break;
      candidate = next;
    }
    modes = candidate;

    if (k % cfg.record_every == 0 || k == steps) {
      traj.times.push_back(t);
      traj.plant_states.push_back(x);
      traj.controller_states.push_back({xs[0], xs[1], xs[2]});
      traj.modes.push_back({static_cast<int>(modes[0]), static_cast<int>(modes[1]), static_cast<int>(modes[2])});
      traj.e.push_back(sig.e);
      traj.u.push_back(sig.u);
      traj.y.push_back(C.dot(x));
      traj.storage.push_back(storage_V1(xs[0], p.h1()) + storage_V2_cascade(xs[1], xs[2]));
      if (cert) traj.lyapunov.push_back(lyapunov_W_pii2(x, xs[0], xs[1], xs[2], *cert));
    }
    if (k == steps) break;

    z << x, xs[0], xs[1], xs[2];
    detail::rk4_step(flow, z, dt, k1, k2, k3, k4);
    x = z.head(n);
    const auto after = resolve_pii2_error_signal(y_of(x), z(n), z(n + 1), z(n + 2), modes, p);
    xs = {after.x_h1, after.x_h2, after.x_h3};
    sig = project_pii2(y_of(x), xs, p);

    Vector joint(n + 3);
    joint << x, xs[0], xs[1], xs[2];
    detail::guard_divergence(joint, cfg.tolerances.divergence, t + dt);
  }
  return traj;
}

}  // namespace nictl
