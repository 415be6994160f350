#pragma once

#include <string>

namespace ponlab::log {

enum class Level { kQuiet = 0, kWarning = 1, kInfo = 2 };

void set_level(Level level) noexcept;
Level level() noexcept;

void warning(const std::string& message);
void info(const std::string& message);

}  // namespace ponlab::log
