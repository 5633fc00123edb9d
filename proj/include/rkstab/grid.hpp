#ifndef RKSTAB_GRID_HPP
#define RKSTAB_GRID_HPP

#include <cstddef>
#include <exception>
#include <functional>
#include <string>
#include <vector>

namespace rkstab {

/// Inclusive 1-D grid: `steps` points from `min` to `max`. A single-step axis
/// holds `min` only.
struct GridAxis {
  double min = 0.0;
  double max = 0.0;
  int steps = 1;

  /// Throws DomainError unless steps >= 1, both bounds are finite and
  /// min < max (min <= max for a single step).
  void validate() const;
  double at(int index) const;
  std::vector<double> values() const;
};

/// Parses "MIN:MAX:STEPS". Throws DomainError naming `what` on malformed input.
GridAxis parse_grid_axis(const std::string& text, const std::string& what = "grid");

/// Calls body(i) for i in [0, count) on up to `jobs` threads. Each index is
/// visited exactly once; the first exception thrown by a body is rethrown
/// after all workers have joined.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body);

}  // namespace rkstab

#endif  // RKSTAB_GRID_HPP
