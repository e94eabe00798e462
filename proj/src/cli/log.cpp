#include "nictl/cli/log.hpp"

#include <cstdlib>
#include <mutex>
#include <string_view>

#include <spdlog/sinks/stdout_sinks.h>

namespace nictl::cli {

void init_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_logger_mt("nictl");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    auto level = spdlog::level::warn;
    if (const char* env = std::getenv(kLogEnvVar); env && *env) {
      level = spdlog::level::from_str(env);
      // from_str maps unknown names to off; keep warnings in that case.
      if (level == spdlog::level::off && std::string_view(env) != "off") level = spdlog::level::warn;
    }
    spdlog::set_level(level);
  });
}

}  // namespace nictl::cli
