#pragma once

#include <string_view>

namespace lambdatune {

enum class LogLevel { Debug, Info, Warning, Error };

// Messages below the threshold are dropped. Defaults to Warning.
void set_log_level(LogLevel level);
void log(LogLevel level, std::string_view message);

inline void log_warning(std::string_view message) { log(LogLevel::Warning, message); }
inline void log_info(std::string_view message) { log(LogLevel::Info, message); }

}  // namespace lambdatune
