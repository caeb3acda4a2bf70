#pragma once

// Minimal stderr logger. AOEECC_LOG = error | warn | info | debug (or 0..3);
// default warn.

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace aoeecc::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

inline Level parse_level(const char* s) {
  if (s == nullptr) return Level::warn;
  const std::string_view v(s);
  if (v == "error" || v == "0") return Level::error;
  if (v == "warn" || v == "1") return Level::warn;
  if (v == "info" || v == "2") return Level::info;
  if (v == "debug" || v == "3") return Level::debug;
  return Level::warn;
}

inline Level level() {
  static const Level lvl = parse_level(std::getenv("AOEECC_LOG"));
  return lvl;
}

inline bool enabled(Level l) { return static_cast<int>(l) <= static_cast<int>(level()); }

inline void write(Level l, const std::string& msg) {
  if (!enabled(l)) return;
  static std::mutex mu;
  static constexpr const char* tags[] = {"error", "warn", "info", "debug"};
  std::lock_guard lock(mu);
  std::cerr << "[aoeecc " << tags[static_cast<int>(l)] << "] " << msg << '\n';
}

inline void error(const std::string& m) { write(Level::error, m); }
inline void warn(const std::string& m) { write(Level::warn, m); }
inline void info(const std::string& m) { write(Level::info, m); }
inline void debug(const std::string& m) { write(Level::debug, m); }

}  // namespace aoeecc::log
