#include "nictl/trajectory_io.hpp"

#include <cstdio>

namespace nictl {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t n = traj.plant_states.empty() ? 0 : static_cast<std::size_t>(traj.plant_states.front().size());
  const std::size_t n_modes = traj.modes.empty() ? 0 : traj.modes.front().size();

  os << "t";
  for (std::size_t i = 0; i < n; ++i) os << ",x" << i + 1;
  for (const auto& label : traj.controller_labels) os << ',' << label;
  for (std::size_t i = 0; i < n_modes; ++i) os << ",mode" << (n_modes > 1 ? std::to_string(i + 1) : "");
  os << ",e,u,y,V,W\n";

  const bool has_v = traj.storage.size() == traj.size();
  const bool has_w = traj.lyapunov.size() == traj.size();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << format_double(traj.times[k]);
    for (std::size_t i = 0; i < n; ++i) os << ',' << format_double(traj.plant_states[k](static_cast<Eigen::Index>(i)));
    for (double c : traj.controller_states[k]) os << ',' << format_double(c);
    for (int m : traj.modes[k]) os << ',' << m;
    os << ',' << format_double(traj.e[k]) << ',' << format_double(traj.u[k]) << ',' << format_double(traj.y[k]);
    os << ',';
    if (has_v) os << format_double(traj.storage[k]);
    os << ',';
    if (has_w) os << format_double(traj.lyapunov[k]);
    os << '\n';
  }
}

}  // namespace nictl
