#ifndef RKSTAB_RECURRENT_KERNEL_HPP
#define RKSTAB_RECURRENT_KERNEL_HPP

#include "rkstab/hyper_params.hpp"
#include "rkstab/reservoir_sim.hpp"

namespace rkstab {

/// Inner products of the two kernel arguments: uu = |u|^2, vv = |v|^2,
/// uv = <u, v>.
struct KernelArgs {
  double uu = 0.0;
  double vv = 0.0;
  double uv = 0.0;
};

/// Limit Gram scalars of two identically driven reservoirs: g_eq is the
/// common squared norm, g_neq the cross inner product.
struct TwinGram {
  double g_eq = 1.0;
  double g_neq = 0.0;
};

/// Full 2x2 limit Gram matrix of two reservoirs driven by distinct unit-norm
/// inputs, together with the overlap <i(t), j(t)> of the inputs fed at the
/// next step.
struct GramPairWithInputs {
  double g_xx = 1.0;
  double g_xy = 0.0;
  double g_yy = 1.0;
  double input_overlap = 0.0;

  void validate() const;
};

/// E[f(w.u) f(w.v)] for w ~ N(0, I) in closed form:
///
///   erf:  (2/pi) asin(2 uv / sqrt((1 + 2 uu)(1 + 2 vv)))
///   sign: (2/pi) asin(uv / sqrt(uu vv))
///   relu: (uv acos(-uv / sqrt(uu vv)) + sqrt(uu vv - uv^2)) / (2 pi)
///
/// Ratios are clamped to [-1, 1]. Sign and ReLU throw DomainError when uu or
/// vv is zero.
double kernel_eval(Activation kind, const KernelArgs& args);

/// Twin recurrence: u and v share the input, so uu = vv = sr^2 g_eq + si^2 and
/// uv = sr^2 g_neq + si^2. For sign, g_eq' = 1. Throws DomainError for sign
/// with sigma_r = sigma_i = 0.
TwinGram rk_step_twin(const TwinGram& state, const HyperParams& params);

/// Iterates rk_step_twin from (1, 0) and records 2 (g_eq - g_neq) for
/// t = 0..t_max. Stops and flags divergence once g_eq exceeds the guard.
Trace rk_trace(const HyperParams& params, int t_max);

/// One step of the general 2x2 recurrence. Diagonal entries use overlap 1;
/// the returned state keeps the current overlap, callers replace it with the
/// next input pair's overlap before the following step.
GramPairWithInputs rk_step_general(const GramPairWithInputs& state, const HyperParams& params);

}  // namespace rkstab

#endif  // RKSTAB_RECURRENT_KERNEL_HPP
