#include "lambdatune/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace lambdatune {

namespace {

std::atomic<LogLevel> g_threshold{LogLevel::Warning};
std::mutex g_mutex;

const char* label(LogLevel level) {
  switch (level) {
    case LogLevel::Debug: return "debug";
    case LogLevel::Info: return "info";
    case LogLevel::Warning: return "warning";
    case LogLevel::Error: return "error";
  }
  return "log";
}

}  // namespace

void set_log_level(LogLevel level) { g_threshold = level; }

void log(LogLevel level, std::string_view message) {
  if (level < g_threshold.load()) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "[" << label(level) << "] " << message << '\n';
}

}  // namespace lambdatune
