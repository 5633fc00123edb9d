#include "rkstab/grid.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <mutex>
#include <thread>

#include "rkstab/errors.hpp"

namespace rkstab {

void GridAxis::validate() const {
  if (steps < 1) throw DomainError("grid needs at least one step");
  if (!std::isfinite(min) || !std::isfinite(max)) throw DomainError("grid bounds must be finite");
  if (steps == 1 ? !(min <= max) : !(min < max))
    throw DomainError("grid range must be increasing");
}

double GridAxis::at(int index) const {
  if (steps == 1) return min;
  if (index == steps - 1) return max;
  return min + (max - min) * static_cast<double>(index) / static_cast<double>(steps - 1);
}

std::vector<double> GridAxis::values() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(steps, 0)));
  for (int k = 0; k < steps; ++k) out.push_back(at(k));
  return out;
}

namespace {

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && first != last;
}

}  // namespace

GridAxis parse_grid_axis(const std::string& text, const std::string& what) {
  const auto bad = [&](const std::string& why) {
    return DomainError(what + ": " + why + " (expected MIN:MAX:STEPS, got '" + text + "')");
  };
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string::npos ? std::string::npos : text.find(':', c1 + 1);
  if (c2 == std::string::npos || text.find(':', c2 + 1) != std::string::npos)
    throw bad("malformed range");
  GridAxis axis;
  const std::string_view view(text);
  if (!parse_number(view.substr(0, c1), axis.min) ||
      !parse_number(view.substr(c1 + 1, c2 - c1 - 1), axis.max) ||
      !parse_number(view.substr(c2 + 1), axis.steps))
    throw bad("malformed range");
  try {
    axis.validate();
  } catch (const DomainError& e) {
    throw bad(e.what());
  }
  return axis;
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const auto n = std::min<std::size_t>(jobs, count);
  pool.reserve(n);
  for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace rkstab
