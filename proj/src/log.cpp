#include "btcurator/log.hpp"

#include <iostream>
#include <mutex>

namespace btcurator::log {

namespace {
std::atomic<Level> g_level{Level::kWarn};
std::atomic<std::size_t> g_warnings{0};
std::mutex g_mutex;
}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

void warn(std::string_view message) {
  ++g_warnings;
  if (g_level < Level::kWarn) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "warning: " << message << '\n';
}

void info(std::string_view message) {
  if (g_level < Level::kInfo) return;
  std::lock_guard lock(g_mutex);
  std::cerr << message << '\n';
}

std::size_t warning_count() { return g_warnings; }

}  // namespace btcurator::log
