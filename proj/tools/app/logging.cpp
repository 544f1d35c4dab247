#include "logging.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <string_view>

namespace ctxgate::app {

void init_logging() {
  auto logger = spdlog::stderr_color_mt("ctxgate");
  logger->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  spdlog::set_default_logger(logger);
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv("CONTEXT_GATE_LOG")) {
    const std::string_view v(env);
    if (v == "error") level = spdlog::level::err;
    if (v == "debug") level = spdlog::level::debug;
  }
  spdlog::set_level(level);
}

}  // namespace ctxgate::app
