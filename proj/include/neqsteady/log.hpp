#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace neqsteady::log {

enum class Level : int { error = 0, warn = 1, info = 2, debug = 3 };

// NEQSTEADY_LOG is read once; default is warn.
inline Level threshold() {
  static Level lv = [] {
    const char* env = std::getenv("NEQSTEADY_LOG");
    if (!env) return Level::warn;
    if (std::strcmp(env, "error") == 0) return Level::error;
    if (std::strcmp(env, "warn") == 0) return Level::warn;
    if (std::strcmp(env, "info") == 0) return Level::info;
    if (std::strcmp(env, "debug") == 0) return Level::debug;
    return Level::warn;
  }();
  return lv;
}

inline void write(Level lv, const std::string& msg) {
  if (static_cast<int>(lv) > static_cast<int>(threshold())) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[neqsteady][%s] %s\n", names[static_cast<int>(lv)], msg.c_str());
}

inline void error(const std::string& m) { write(Level::error, m); }
inline void warn(const std::string& m) { write(Level::warn, m); }
inline void info(const std::string& m) { write(Level::info, m); }
inline void debug(const std::string& m) { write(Level::debug, m); }

}  // namespace neqsteady::log
