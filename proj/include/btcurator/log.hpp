#pragma once

#include <atomic>
#include <string_view>

namespace btcurator::log {

enum class Level { kQuiet = 0, kWarn = 1, kInfo = 2 };

void set_level(Level level);
Level level();

void warn(std::string_view message);
void info(std::string_view message);

/// Number of warnings emitted since startup (counted even when quiet).
std::size_t warning_count();

}  // namespace btcurator::log
