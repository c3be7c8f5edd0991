#pragma once

#include <stdexcept>
#include <string>

namespace cardmix {

// Error classes map onto process exit codes: ConfigError -> 2,
// DataError -> 3, ContractViolation -> 4.

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

/// Current verbosity; initialized from CARDMIX_LOG (error|info|debug).
LogLevel log_level();
void set_log_level(LogLevel level);

void log_error(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace cardmix
