#include "rkstab/hyper_params.hpp"

#include <cmath>

#include "rkstab/errors.hpp"

namespace rkstab {

std::string_view to_string(Activation kind) {
  switch (kind) {
    case Activation::Erf:
      return "erf";
    case Activation::Sign:
      return "sign";
    case Activation::ReLU:
      return "relu";
  }
  return "unknown";
}

std::optional<Activation> parse_activation(std::string_view name) {
  if (name == "erf") return Activation::Erf;
  if (name == "sign") return Activation::Sign;
  if (name == "relu") return Activation::ReLU;
  return std::nullopt;
}

void HyperParams::validate() const {
  if (!(std::isfinite(sigma_r) && sigma_r >= 0.0))
    throw DomainError("sigma_r must be a finite nonnegative number");
  if (!(std::isfinite(sigma_i) && sigma_i >= 0.0))
    throw DomainError("sigma_i must be a finite nonnegative number");
}

void SimConfig::validate() const {
  if (n < 1) throw DomainError("reservoir size n must be at least 1");
  if (d < 1) throw DomainError("input dimension d must be at least 1");
  if (t_max < 1) throw DomainError("t_max must be at least 1");
}

}  // namespace rkstab
