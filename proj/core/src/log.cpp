#include "affscope/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace affscope::log {

namespace {
std::atomic<Level> g_level{Level::warn};
std::mutex g_mutex;

const char* tag(Level level) {
    switch (level) {
        case Level::debug: return "debug";
        case Level::info: return "info";
        case Level::warn: return "warning";
        case Level::error: return "error";
        case Level::off: break;
    }
    return "";
}
}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

void write(Level level, std::string_view message) {
    if (level < g_level.load() || level == Level::off) return;
    std::lock_guard lock(g_mutex);
    std::clog << "affscope: " << tag(level) << ": " << message << '\n';
}

}  // namespace affscope::log
