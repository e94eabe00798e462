#include <algorithm>
#include <cmath>
#include <limits>

#include "nictl/errors.hpp"
#include "nictl/sim.hpp"

namespace nictl {

void SimConfig::validate() const {
  if (!std::isfinite(dt) || dt <= 0.0) throw PreconditionViolation("sim.dt must be > 0");
  if (!std::isfinite(t_end) || t_end < dt) throw PreconditionViolation("sim.t_end must be >= dt");
  if (record_every < 1) throw PreconditionViolation("sim.record_every must be >= 1");
  if (!std::isfinite(r)) throw PreconditionViolation("sim.r must be finite");
}

long SimConfig::steps() const { return static_cast<long>(std::llround(t_end / dt)); }

Vector Trajectory::joint_state(std::size_t k) const {
  const auto& x = plant_states.at(k);
  const auto& c = controller_states.at(k);
  Vector z(x.size() + static_cast<Eigen::Index>(c.size()));
  z.head(x.size()) = x;
  for (std::size_t i = 0; i < c.size(); ++i) z(x.size() + static_cast<Eigen::Index>(i)) = c[i];
  return z;
}

MonotoneReport check_monotone(const Trajectory& traj, double budget) {
  if (traj.lyapunov.size() != traj.times.size()) throw PreconditionViolation("trajectory has no recorded W");
  MonotoneReport r;
  r.worst_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    const double excess = traj.lyapunov[k + 1] - traj.lyapunov[k] - budget * dt;
    if (excess > r.worst_violation) {
      r.worst_violation = excess;
      r.worst_index = k;
    }
  }
  if (traj.size() < 2) r.worst_violation = 0.0;
  r.pass = r.worst_violation <= 0.0;
  return r;
}

Trajectory time_reversed(const Trajectory& traj) {
  Trajectory out = traj;
  auto rev = [](auto& v) { std::reverse(v.begin(), v.end()); };
  rev(out.plant_states);
  rev(out.controller_states);
  rev(out.modes);
  rev(out.e);
  rev(out.u);
  rev(out.y);
  rev(out.storage);
  rev(out.lyapunov);
  if (!traj.times.empty()) {
    const double t0 = traj.times.front();
    const double t1 = traj.times.back();
    for (std::size_t k = 0; k < traj.size(); ++k) out.times[k] = t0 + (t1 - traj.times[traj.size() - 1 - k]);
  }
  return out;
}

namespace {

void note_violation(SectorReport& r, double v, std::size_t k, int element) {
  if (v > r.worst_violation) {
    r.worst_violation = v;
    r.worst_index = k;
    r.worst_element = element;
  }
}

}  // namespace

SectorReport check_sector_irc(const Trajectory& traj, const HigsIrcParams& p, double rel_tol) {
  SectorReport r;
  for (std::size_t k = 0; k < traj.size(); ++k)
    note_violation(r, sector_violation(traj.e[k], traj.controller_states[k].at(0), p.kappa_tilde()), k, 0);
  r.pass = r.worst_violation <= rel_tol;
  return r;
}

SectorReport check_sector_pii2(const Trajectory& traj, const HigsPii2Params& p, double rel_tol) {
  SectorReport r;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& c = traj.controller_states[k];
    note_violation(r, sector_violation(traj.e[k], c.at(0), p.h1().k_h), k, 0);
    note_violation(r, sector_violation(traj.e[k], c.at(1), p.h2().k_h), k, 1);
    note_violation(r, sector_violation(c.at(1), c.at(2), p.h3().k_h), k, 2);
  }
  r.pass = r.worst_violation <= rel_tol;
  return r;
}

double sup_norm_difference(const Trajectory& a, const Trajectory& b, std::size_t stride_b) {
  if (stride_b == 0) throw PreconditionViolation("stride must be positive");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const std::size_t kb = k * stride_b;
    if (kb >= b.size()) throw PreconditionViolation("trajectories do not share a time grid");
    if (std::abs(a.times[k] - b.times[kb]) > 1e-9 * std::max(1.0, std::abs(a.times[k])))
      throw PreconditionViolation("trajectories do not share a time grid");
    worst = std::max(worst, (a.joint_state(k) - b.joint_state(kb)).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace nictl
