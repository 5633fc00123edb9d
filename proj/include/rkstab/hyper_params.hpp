#ifndef RKSTAB_HYPER_PARAMS_HPP
#define RKSTAB_HYPER_PARAMS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace rkstab {

enum class Activation { Erf, Sign, ReLU };

std::string_view to_string(Activation kind);
std::optional<Activation> parse_activation(std::string_view name);

/// Weight scales and nonlinearity of a reservoir. sigma_r is the standard
/// deviation of the internal weights, sigma_i the one of the input weights.
struct HyperParams {
  Activation activation = Activation::Erf;
  double sigma_r = 0.0;
  double sigma_i = 0.0;

  /// Throws DomainError if a standard deviation is negative or not finite.
  void validate() const;
};

/// Reservoir size, input dimension, trace length and base seed.
struct SimConfig {
  int n = 1;
  int d = 10;
  int t_max = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Threshold above which a squared norm or a stability metric is reported
/// as divergent. Shared by the finite reservoirs and the kernel iteration.
inline constexpr double kDivergenceGuard = 1e12;

}  // namespace rkstab

#endif  // RKSTAB_HYPER_PARAMS_HPP
