#include "hmtl/log.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string_view>

namespace hmtl::log {
namespace {

std::optional<Level>& override_level() {
    static std::optional<Level> level;
    return level;
}

Level from_env() {
    const char* raw = std::getenv("HMTL_LOG");
    const std::string_view v = raw ? raw : "";
    if (v == "error") return Level::Error;
    if (v == "info") return Level::Info;
    if (v == "debug") return Level::Debug;
    return Level::Warn;
}

const char* tag(Level level) {
    switch (level) {
        case Level::Error: return "error";
        case Level::Warn: return "warn";
        case Level::Info: return "info";
        case Level::Debug: return "debug";
    }
    return "";
}

}  // namespace

Level threshold() {
    if (override_level()) return *override_level();
    static const Level env = from_env();
    return env;
}

void set_threshold(Level level) { override_level() = level; }

void write(Level level, const std::string& message) {
    if (static_cast<int>(level) > static_cast<int>(threshold())) return;
    std::cerr << "[" << tag(level) << "] " << message << '\n';
}

}  // namespace hmtl::log
