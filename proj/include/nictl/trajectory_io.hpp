#pragma once

#include <ostream>
#include <string>

#include "nictl/sim.hpp"

namespace nictl {

/// CSV with header  t, x1..xn, <controller states>, mode_<i>.., e, u, y, V, W.
/// Values use round-trip precision; V/W cells are empty when not recorded.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace nictl
