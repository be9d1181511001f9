#pragma once

#include <string_view>

namespace mee::log {

void set_quiet(bool quiet);
bool quiet();

void warn(std::string_view message);
void info(std::string_view message);

/// Emits the "h < 1" warning at most once per process.
void warn_small_bandwidth(double h);

} // namespace mee::log
