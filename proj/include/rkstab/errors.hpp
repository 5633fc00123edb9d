#ifndef RKSTAB_ERRORS_HPP
#define RKSTAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rkstab {

/// Arguments outside the set where a kernel, recurrence or formula is defined.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A fixed-point iteration hit its iteration cap.
class NoConvergenceError : public std::runtime_error {
 public:
  explicit NoConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// A state update produced a non-finite value.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rkstab

#endif  // RKSTAB_ERRORS_HPP
