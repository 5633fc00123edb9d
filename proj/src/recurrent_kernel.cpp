#include "rkstab/recurrent_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rkstab/errors.hpp"

namespace rkstab {

namespace {

constexpr double kTwoOverPi = 2.0 / std::numbers::pi;
constexpr double kOneOverTwoPi = 0.5 / std::numbers::pi;

// (2/pi) asin(r) with r clamped; the endpoints are returned exactly.
double scaled_arcsin(double r) {
  if (r >= 1.0) return 1.0;
  if (r <= -1.0) return -1.0;
  return kTwoOverPi * std::asin(r);
}

void require_nonzero(const KernelArgs& args, const char* name) {
  if (!(args.uu > 0.0) || !(args.vv > 0.0))
    throw DomainError(std::string(name) + " kernel is undefined for zero-norm arguments");
}

}  // namespace

double kernel_eval(Activation kind, const KernelArgs& args) {
  if (args.uu < 0.0 || args.vv < 0.0) throw DomainError("kernel arguments need uu, vv >= 0");
  switch (kind) {
    case Activation::Erf: {
      const double denom = std::sqrt((1.0 + 2.0 * args.uu) * (1.0 + 2.0 * args.vv));
      return scaled_arcsin(2.0 * args.uv / denom);
    }
    case Activation::Sign: {
      require_nonzero(args, "sign");
      return scaled_arcsin(args.uv / std::sqrt(args.uu * args.vv));
    }
    case Activation::ReLU: {
      require_nonzero(args, "relu");
      const double norms = std::sqrt(args.uu * args.vv);
      const double cosine = args.uv / norms;
      // At cosine = +-1 the root term vanishes and acos(-cosine) is pi or 0.
      if (cosine >= 1.0) return 0.5 * args.uv;
      if (cosine <= -1.0) return 0.0;
      // uu vv - uv^2 with one rounding (Kahan), and the angle from atan2, keep
      // full precision as the cosine approaches 1.
      const double square = args.uv * args.uv;
      const double det = std::fma(args.uu, args.vv, -square) + std::fma(-args.uv, args.uv, square);
      const double root = std::sqrt(std::max(0.0, det));
      const double angle = std::atan2(root, args.uv);
      return kOneOverTwoPi * (args.uv * (std::numbers::pi - angle) + root);
    }
  }
  throw DomainError("unknown activation");
}

void GramPairWithInputs::validate() const {
  if (!(g_xx >= 0.0) || !(g_yy >= 0.0)) throw DomainError("Gram diagonal must be nonnegative");
  if (g_xy * g_xy > g_xx * g_yy + 1e-12) throw DomainError("Gram matrix violates Cauchy-Schwarz");
  if (!(input_overlap >= -1.0 && input_overlap <= 1.0))
    throw DomainError("input overlap must lie in [-1, 1]");
}

TwinGram rk_step_twin(const TwinGram& state, const HyperParams& params) {
  const double sr2 = params.sigma_r * params.sigma_r;
  const double si2 = params.sigma_i * params.sigma_i;
  const double same = sr2 * state.g_eq + si2;
  const double cross = sr2 * state.g_neq + si2;

  switch (params.activation) {
    case Activation::Erf:
      return TwinGram{kernel_eval(Activation::Erf, {same, same, same}),
                      kernel_eval(Activation::Erf, {same, same, cross})};
    case Activation::Sign:
      if (same == 0.0) throw DomainError("sign recurrence needs sigma_r^2 + sigma_i^2 > 0");
      return TwinGram{1.0, kernel_eval(Activation::Sign, {same, same, cross})};
    case Activation::ReLU:
      // Continuous extension at the zero vector, where the kernel vanishes.
      if (same == 0.0) return TwinGram{0.0, 0.0};
      return TwinGram{0.5 * same, kernel_eval(Activation::ReLU, {same, same, cross})};
  }
  throw DomainError("unknown activation");
}

Trace rk_trace(const HyperParams& params, int t_max) {
  params.validate();
  if (t_max < 1) throw DomainError("t_max must be at least 1");
  Trace trace;
  trace.label = "L_rk";
  trace.values.reserve(static_cast<std::size_t>(t_max) + 1);
  TwinGram g;
  trace.values.push_back(2.0 * (g.g_eq - g.g_neq));
  for (int t = 0; t < t_max; ++t) {
    g = rk_step_twin(g, params);
    const double metric = 2.0 * (g.g_eq - g.g_neq);
    if (!std::isfinite(metric) || !(g.g_eq <= kDivergenceGuard)) {
      trace.divergent = true;
      break;
    }
    trace.values.push_back(metric);
  }
  return trace;
}

GramPairWithInputs rk_step_general(const GramPairWithInputs& state, const HyperParams& params) {
  const double sr2 = params.sigma_r * params.sigma_r;
  const double si2 = params.sigma_i * params.sigma_i;
  const double uu = sr2 * state.g_xx + si2;
  const double vv = sr2 * state.g_yy + si2;
  const double uv = sr2 * state.g_xy + si2 * state.input_overlap;

  // ReLU extends continuously by 0 to zero-norm arguments; sign does not.
  const auto entry = [&](const KernelArgs& args) {
    if (params.activation == Activation::ReLU && (args.uu == 0.0 || args.vv == 0.0)) return 0.0;
    return kernel_eval(params.activation, args);
  };
  GramPairWithInputs next = state;
  next.g_xx = entry({uu, uu, uu});
  next.g_xy = entry({uu, vv, uv});
  next.g_yy = entry({vv, vv, vv});
  return next;
}

}  // namespace rkstab
