#include "cardmix/common.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace cardmix {

namespace {

LogLevel parse_env_level() {
  const char* env = std::getenv("CARDMIX_LOG");
  if (env == nullptr) return LogLevel::Error;
  std::string v(env);
  if (v == "debug") return LogLevel::Debug;
  if (v == "info") return LogLevel::Info;
  return LogLevel::Error;
}

LogLevel& level_ref() {
  static LogLevel level = parse_env_level();
  return level;
}

std::mutex log_mutex;

void emit(const char* tag, const std::string& msg) {
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << tag << msg << '\n';
}

}  // namespace

LogLevel log_level() { return level_ref(); }

void set_log_level(LogLevel level) { level_ref() = level; }

void log_error(const std::string& msg) { emit("[error] ", msg); }

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) emit("[info]  ", msg);
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) emit("[debug] ", msg);
}

}  // namespace cardmix
