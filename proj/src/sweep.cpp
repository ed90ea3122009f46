#include "tsr/sweep.hpp"

#include "tsr/errors.hpp"

#include <omp.h>

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>

namespace tsr::sweep {

namespace {

std::atomic<int> g_override{0};

int env_thread_limit() {
  const char* raw = std::getenv("TSR_SIM_THREADS");
  if (raw == nullptr) return 0;
  int value = 0;
  const char* end = raw + std::char_traits<char>::length(raw);
  auto [ptr, ec] = std::from_chars(raw, end, value);
  if (ec != std::errc() || ptr != end || value <= 0) return 0;
  return value;
}

}  // namespace

int thread_limit() {
  if (int forced = g_override.load(); forced > 0) return forced;
  if (int env = env_thread_limit(); env > 0) return env;
  return omp_get_max_threads();
}

void set_thread_limit(int threads) { g_override.store(threads > 0 ? threads : 0); }

std::vector<double> make_grid(double first, double last, std::size_t points, Spacing spacing) {
  if (points < 2) throw InvalidArgument("grid needs at least two points");
  if (!(std::isfinite(first) && std::isfinite(last) && first < last)) {
    throw InvalidArgument(fmt::format("grid bounds must satisfy first < last (got {}, {})", first, last));
  }
  if (spacing == Spacing::Log && first <= 0.0) {
    throw InvalidArgument("logarithmic grid needs a positive lower bound");
  }
  std::vector<double> grid(points);
  const double steps = static_cast<double>(points - 1);
  if (spacing == Spacing::Linear) {
    for (std::size_t i = 0; i < points; ++i) {
      grid[i] = first + (last - first) * (static_cast<double>(i) / steps);
    }
  } else {
    const double lo = std::log(first);
    const double hi = std::log(last);
    for (std::size_t i = 0; i < points; ++i) {
      grid[i] = std::exp(lo + (hi - lo) * (static_cast<double>(i) / steps));
    }
  }
  grid.front() = first;
  grid.back() = last;
  return grid;
}

Spacing parse_spacing(const std::string& name) {
  if (name == "log") return Spacing::Log;
  if (name == "linear") return Spacing::Linear;
  throw InvalidArgument(fmt::format("unknown grid spacing '{}' (expected log|linear)", name));
}

std::string to_string(Spacing spacing) { return spacing == Spacing::Log ? "log" : "linear"; }

}  // namespace tsr::sweep
