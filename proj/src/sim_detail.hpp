#pragma once

#include <cmath>

#include "nictl/errors.hpp"
#include "nictl/sim.hpp"

namespace nictl::detail {

/// Classic RK4 step of s' = f(s) in place; k1..k4 are scratch buffers sized like s.
template <class Flow>
void rk4_step(Flow&& f, Vector& s, double dt, Vector& k1, Vector& k2, Vector& k3, Vector& k4) {
  f(s, k1);
  f(Vector(s + 0.5 * dt * k1), k2);
  f(Vector(s + 0.5 * dt * k2), k3);
  f(Vector(s + dt * k3), k4);
  s += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline void guard_divergence(const Vector& z, double limit, double t) {
  if (!z.allFinite() || z.cwiseAbs().maxCoeff() > limit) throw NonFiniteState(t);
}

/// Plant checks shared by the HIGS loops: y = C x (no feedthrough), invertible A, sized x0.
inline void require_loop_plant(const StateSpace& plant, const SimConfig& cfg, std::size_t controller_order) {
  if (plant.D_ff() != 0.0) throw PreconditionViolation("HIGS loops require a strictly proper plant (D_ff = 0)");
  if (is_singular(plant.A())) throw SingularA();
  if (cfg.x0.size() != plant.order()) throw DimensionMismatch("sim.x0 does not match the plant order");
  if (!cfg.controller_x0.empty() && cfg.controller_x0.size() != controller_order)
    throw DimensionMismatch("sim.controller_x0 does not match the controller order");
}

inline void reserve(Trajectory& traj, long steps, int record_every) {
  const auto n = static_cast<std::size_t>(steps / record_every + 2);
  traj.times.reserve(n);
  traj.plant_states.reserve(n);
  traj.controller_states.reserve(n);
  traj.modes.reserve(n);
  traj.e.reserve(n);
  traj.u.reserve(n);
  traj.y.reserve(n);
  traj.storage.reserve(n);
}

}  // namespace nictl::detail
