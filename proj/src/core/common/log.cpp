#include "common/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace ponlab::log {
namespace {

std::atomic<Level> g_level{Level::kWarning};
std::mutex g_mutex;

void emit(const char* tag, const std::string& message) {
  std::lock_guard lock(g_mutex);
  std::clog << "[ponlab " << tag << "] " << message << '\n';
}

}  // namespace

void set_level(Level level) noexcept { g_level.store(level); }
Level level() noexcept { return g_level.load(); }

void warning(const std::string& message) {
  if (g_level.load() >= Level::kWarning) emit("warning", message);
}

void info(const std::string& message) {
  if (g_level.load() >= Level::kInfo) emit("info", message);
}

}  // namespace ponlab::log
