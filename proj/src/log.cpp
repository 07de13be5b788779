#include "mchjm/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace mchjm {
namespace {

std::atomic<LogLevel> g_level{LogLevel::warning};
std::mutex g_mutex;

void emit(LogLevel level, const char* tag, std::string_view message) {
  if (level < g_level.load(std::memory_order_relaxed)) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "[mchjm " << tag << "] " << message << '\n';
}

}  // namespace

void set_log_level(LogLevel level) { g_level = level; }
LogLevel log_level() { return g_level; }

void log_debug(std::string_view message) { emit(LogLevel::debug, "debug", message); }
void log_info(std::string_view message) { emit(LogLevel::info, "info", message); }
void log_warning(std::string_view message) { emit(LogLevel::warning, "warning", message); }
void log_error(std::string_view message) { emit(LogLevel::error, "error", message); }

}  // namespace mchjm
