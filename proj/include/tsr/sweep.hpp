#pragma once

// Frequency sweeps. Every per-point evaluation in this library is a pure
// function of its inputs, so a sweep is a map over the grid. map_serial is the
// reference; map_parallel splits the same loop across OpenMP threads and must
// produce bit-identical output.

#include <cstddef>
#include <exception>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace tsr::sweep {

enum class Execution { Serial, Parallel };

enum class Spacing { Linear, Log };

/// Thread cap for parallel sweeps: TSR_SIM_THREADS if set to a positive
/// integer, otherwise the OpenMP default.
int thread_limit();

/// Overrides the cap for this process (0 restores the environment/default).
void set_thread_limit(int threads);

std::vector<double> make_grid(double first, double last, std::size_t points, Spacing spacing);

Spacing parse_spacing(const std::string& name);
std::string to_string(Spacing spacing);

template <class Fn>
auto map_serial(std::span<const double> grid, Fn&& fn) {
  using Result = std::invoke_result_t<Fn&, double>;
  std::vector<Result> out;
  out.reserve(grid.size());
  for (double x : grid) out.push_back(fn(x));
  return out;
}

template <class Fn>
auto map_parallel(std::span<const double> grid, Fn&& fn) {
  using Result = std::invoke_result_t<Fn&, double>;
  static_assert(std::is_default_constructible_v<Result>);
  std::vector<Result> out(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
  const int threads = thread_limit();
  // Exceptions must not escape an OpenMP region; keep the first one and
  // rethrow after the join.
  std::exception_ptr failure;
#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = fn(grid[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(tsr_sweep_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

template <class Fn>
auto map(std::span<const double> grid, Fn&& fn, Execution exec) {
  return exec == Execution::Serial ? map_serial(grid, std::forward<Fn>(fn))
                                   : map_parallel(grid, std::forward<Fn>(fn));
}

}  // namespace tsr::sweep
