#pragma once

#include <atomic>
#include <iostream>
#include <mutex>
#include <string_view>

namespace photon_switch::log {

enum class Level { debug = 0, info = 1, warning = 2, quiet = 3 };

inline std::atomic<Level>& threshold() {
  static std::atomic<Level> level{Level::warning};
  return level;
}

inline void set_level(Level level) { threshold().store(level); }

inline void write(Level level, std::string_view msg) {
  if (level < threshold().load()) return;
  static std::mutex mutex;
  std::scoped_lock lock(mutex);
  switch (level) {
    case Level::debug: std::clog << "[debug] "; break;
    case Level::info: std::clog << "[info] "; break;
    default: std::clog << "[warning] "; break;
  }
  std::clog << msg << '\n';
}

inline void info(std::string_view msg) { write(Level::info, msg); }
inline void warn(std::string_view msg) { write(Level::warning, msg); }

} // namespace photon_switch::log
