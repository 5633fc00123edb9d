#ifndef RKSTAB_STABILITY_ANALYSIS_HPP
#define RKSTAB_STABILITY_ANALYSIS_HPP

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "rkstab/grid.hpp"
#include "rkstab/hyper_params.hpp"

namespace rkstab {

struct FixedPointResult {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;  ///< |h(value) - value|
};

enum class Regime { Stable, Chaotic, Divergent, Undefined };

std::string_view to_string(Regime regime);

/// Asymptotic classification. limit_value is the limit of the kernel
/// stability metric, +inf when Divergent.
struct RegimeLabel {
  Regime label = Regime::Stable;
  double limit_value = 0.0;
};

/// Receives every iterate of a fixed-point solver, in order.
using IterateObserver = std::function<void(double)>;

/// Plain iterations before the erf solvers fall back to bisecting the
/// monotone map's sign change.
inline constexpr int kMaxFixedPointIterations = 100'000;
inline constexpr double kDefaultStabilityTol = 1e-6;
inline constexpr double kDefaultSolverTol = 1e-14;
inline constexpr int kDefaultPhaseTMax = 200;

/// sqrt(pi)/2: the erf frontier at zero input, below which the input-free
/// reservoir is stable.
double erf_critical_sigma_r();

/// Limit of g_eq for erf: iterates g -> (2/pi) asin(2s / (1 + 2s)),
/// s = sr^2 g + si^2, from 1 until successive iterates differ by less than
/// `tol`. With sigma_i = 0 and 4 sr^2 / pi <= 1 the limit is exactly 0.
/// Slow iterations are finished by bisection after kMaxFixedPointIterations.
FixedPointResult erf_fixed_point_a(const HyperParams& params, double tol,
                                   const IterateObserver& observe = {});

/// Smallest fixed point on [0, a] of the cross-term map with g_eq frozen at
/// `a`, reached by iterating from 0 (bisection after kMaxFixedPointIterations).
FixedPointResult erf_fixed_point_b(const HyperParams& params, double a, double tol,
                                   const IterateObserver& observe = {});

/// Smallest fixed point of the sign cross-term map
/// x -> (2/pi) asin((sr^2 x + si^2) / (sr^2 + si^2)), iterated from 0.
/// Throws NoConvergenceError after kMaxFixedPointIterations.
FixedPointResult sign_fixed_point_b(const HyperParams& params, double tol,
                                    const IterateObserver& observe = {});

/// Limit of the kernel stability metric and its classification; Stable iff
/// limit_value <= tol. Solver iterations stop at `solver_tol`.
RegimeLabel rk_limit(const HyperParams& params, double tol,
                     double solver_tol = kDefaultSolverTol);

/// Frontier input scale psi(sigma_r) for erf, sigma_r >= sqrt(pi)/2:
///
///   sigma_i^2 = 4 sr^4 / pi^2 - 1/4 - (2 sr^2 / pi) asin((16 sr^4 - pi^2) / (16 sr^4 + pi^2))
///
/// evaluated in a cancellation-free form in q - 1, q = 16 sr^4 / pi^2.
/// Inputs at or above the frontier are stable.
double erf_frontier_sigma_i(double sigma_r);

/// Inverse of erf_frontier_sigma_i by bisection on sigma_r.
double erf_frontier_sigma_r(double sigma_i, double tol = 1e-13);

/// Large-input approximation 16 sr^2 / (pi^2 si^2) of the sign limit.
double sign_limit_asymptotic(double sigma_r, double sigma_i);

struct PhaseCell {
  double sigma_r = 0.0;
  double sigma_i = 0.0;
  double metric_final = 0.0;  ///< +inf when divergent, NaN on error
  Regime label = Regime::Undefined;
  std::string error;  ///< non-empty when the cell could not be evaluated
};

struct PhaseDiagram {
  Activation activation = Activation::Erf;
  GridAxis sigma_r;
  GridAxis sigma_i;
  int t_max = kDefaultPhaseTMax;
  double tol = kDefaultStabilityTol;
  std::vector<PhaseCell> cells;  ///< row-major: sigma_r outer, sigma_i inner
};

/// Evaluates the kernel trace to t_max on every grid cell. Per-cell errors
/// are recorded in the cell. Results do not depend on `jobs`.
PhaseDiagram phase_diagram(Activation kind, const GridAxis& sigma_r, const GridAxis& sigma_i,
                           int t_max = kDefaultPhaseTMax, double tol = kDefaultStabilityTol,
                           unsigned jobs = 1);

}  // namespace rkstab

#endif  // RKSTAB_STABILITY_ANALYSIS_HPP
