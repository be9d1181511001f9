#include "mee/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <sstream>

namespace mee::log {
namespace {

std::atomic<bool> g_quiet{false};
std::atomic<bool> g_small_h_warned{false};
std::mutex g_stream_mutex;

} // namespace

void set_quiet(bool quiet) { g_quiet = quiet; }
bool quiet() { return g_quiet; }

void warn(std::string_view message) {
  std::lock_guard lock(g_stream_mutex);
  std::cerr << "warning: " << message << '\n';
}

void info(std::string_view message) {
  if (g_quiet) return;
  std::lock_guard lock(g_stream_mutex);
  std::cerr << message << '\n';
}

void warn_small_bandwidth(double h) {
  if (h >= 1.0 || g_quiet) return;
  if (g_small_h_warned.exchange(true)) return;
  std::ostringstream os;
  os << "scaling parameter h = " << h
     << " is below 1; consistency results assume h >= 1";
  warn(os.str());
}

} // namespace mee::log
