#pragma once

#include <spdlog/spdlog.h>

namespace nictl::cli {

/// Environment variable selecting log verbosity (trace, debug, info, warn, error, off).
inline constexpr const char* kLogEnvVar = "NICTL_LOG";

/// Routes spdlog to stderr and applies NICTL_LOG (default: warn). Safe to call repeatedly.
void init_logging();

}  // namespace nictl::cli
