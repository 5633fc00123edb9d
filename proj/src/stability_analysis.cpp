#include "rkstab/stability_analysis.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "rkstab/errors.hpp"
#include "rkstab/recurrent_kernel.hpp"

namespace rkstab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Iteration {
  FixedPointResult result;
  bool converged = false;
};

// Iterates x -> map(x) from `start` until |x' - x| < tol and the geometric
// estimate of the remaining distance, change * r / (1 - r) with r the ratio
// of successive changes, is below tol as well.
template <typename Map>
Iteration iterate(Map&& map, double start, double tol, const IterateObserver& observe,
                  const char* what) {
  if (!(tol > 0.0)) throw DomainError(std::string(what) + ": tolerance must be positive");
  double x = start;
  double previous_change = kInf;
  if (observe) observe(x);
  for (int k = 1; k <= kMaxFixedPointIterations; ++k) {
    const double next = map(x);
    if (observe) observe(next);
    const double change = std::abs(next - x);
    x = next;
    const double ratio = change / previous_change;
    if (change == 0.0 || (change < tol && ratio < 1.0 && change * ratio / (1.0 - ratio) < tol))
      return {FixedPointResult{x, k, std::abs(map(x) - x)}, true};
    previous_change = change;
  }
  return {FixedPointResult{x, kMaxFixedPointIterations, std::abs(map(x) - x)}, false};
}

// Root of map(x) - x between `pos` (where it is > 0) and `neg` (< 0),
// bisected down to adjacent doubles.
template <typename Map>
FixedPointResult bisect_fixed_point(Map&& map, double pos, double neg, int iterations) {
  for (;;) {
    const double mid = 0.5 * (pos + neg);
    if (mid == pos || mid == neg) break;
    (map(mid) - mid > 0.0 ? pos : neg) = mid;
    ++iterations;
  }
  const double x = 0.5 * (pos + neg);
  return FixedPointResult{x, iterations, std::abs(map(x) - x)};
}

void require_activation(const HyperParams& params, Activation kind, const char* what) {
  if (params.activation != kind)
    throw DomainError(std::string(what) + " requires activation " + std::string(to_string(kind)));
}

}  // namespace

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::Stable:
      return "stable";
    case Regime::Chaotic:
      return "chaotic";
    case Regime::Divergent:
      return "divergent";
    case Regime::Undefined:
      return "error";
  }
  return "error";
}

double erf_critical_sigma_r() { return 0.5 * std::sqrt(std::numbers::pi); }

FixedPointResult erf_fixed_point_a(const HyperParams& params, double tol,
                                   const IterateObserver& observe) {
  require_activation(params, Activation::Erf, "erf_fixed_point_a");
  params.validate();
  const double sr2 = params.sigma_r * params.sigma_r;
  const double si2 = params.sigma_i * params.sigma_i;
  // 0 is then the globally attracting fixed point.
  if (si2 == 0.0 && 4.0 * sr2 / std::numbers::pi <= 1.0) {
    if (!(tol > 0.0)) throw DomainError("erf_fixed_point_a: tolerance must be positive");
    return FixedPointResult{0.0, 0, 0.0};
  }
  const auto h1 = [&](double g) {
    const double s = sr2 * g + si2;
    return kernel_eval(Activation::Erf, {s, s, s});
  };
  const Iteration it = iterate(h1, 1.0, tol, observe, "erf_fixed_point_a");
  if (it.converged) return it.result;
  // Iterates decrease towards a, so the sign change lies below the last one.
  const double above = it.result.value;
  for (double below = 0.5 * above; below > 0.0; below *= 0.5)
    if (h1(below) - below > 0.0) return bisect_fixed_point(h1, below, above, it.result.iterations);
  return it.result;
}

FixedPointResult erf_fixed_point_b(const HyperParams& params, double a, double tol,
                                   const IterateObserver& observe) {
  require_activation(params, Activation::Erf, "erf_fixed_point_b");
  params.validate();
  if (!(a >= 0.0 && a <= 1.0)) throw DomainError("erf_fixed_point_b: a must lie in [0, 1]");
  const double sr2 = params.sigma_r * params.sigma_r;
  const double si2 = params.sigma_i * params.sigma_i;
  const double same = sr2 * a + si2;
  const auto h2 = [&](double x) {
    return kernel_eval(Activation::Erf, {same, same, sr2 * x + si2});
  };
  const Iteration it = iterate(h2, 0.0, tol, observe, "erf_fixed_point_b");
  if (it.converged) return it.result;
  // The map is convex on [0, a] with a as a fixed point. A second fixed point
  // below a exists iff the map dips under the diagonal somewhere left of a.
  const double below = it.result.value;
  for (double gap = 0.5 * (a - below); gap > 0.0 && a - gap > below; gap *= 0.5)
    if (h2(a - gap) - (a - gap) < 0.0) return bisect_fixed_point(h2, below, a - gap, it.result.iterations);
  return FixedPointResult{a, it.result.iterations, std::abs(h2(a) - a)};
}

FixedPointResult sign_fixed_point_b(const HyperParams& params, double tol,
                                    const IterateObserver& observe) {
  require_activation(params, Activation::Sign, "sign_fixed_point_b");
  params.validate();
  const double sr2 = params.sigma_r * params.sigma_r;
  const double si2 = params.sigma_i * params.sigma_i;
  const double same = sr2 + si2;
  if (same == 0.0) throw DomainError("sign recurrence needs sigma_r^2 + sigma_i^2 > 0");
  const auto h2 = [&](double x) {
    return kernel_eval(Activation::Sign, {same, same, sr2 * x + si2});
  };
  const Iteration it = iterate(h2, 0.0, tol, observe, "sign_fixed_point_b");
  if (!it.converged)
    throw NoConvergenceError("sign_fixed_point_b: no convergence within " +
                             std::to_string(kMaxFixedPointIterations) + " iterations");
  return it.result;
}

RegimeLabel rk_limit(const HyperParams& params, double tol, double solver_tol) {
  params.validate();
  if (!(tol > 0.0)) throw DomainError("rk_limit: tolerance must be positive");
  const auto classify = [tol](double limit) {
    return RegimeLabel{limit <= tol ? Regime::Stable : Regime::Chaotic, limit};
  };

  switch (params.activation) {
    case Activation::Erf: {
      const double a = erf_fixed_point_a(params, solver_tol).value;
      const double b = erf_fixed_point_b(params, a, solver_tol).value;
      return classify(std::max(0.0, 2.0 * (a - b)));
    }
    case Activation::Sign: {
      const double b = sign_fixed_point_b(params, solver_tol).value;
      return classify(2.0 * (1.0 - b));
    }
    case Activation::ReLU: {
      const double sr2 = params.sigma_r * params.sigma_r;
      if (sr2 < 2.0) return RegimeLabel{Regime::Stable, 0.0};
      if (sr2 > 2.0) return RegimeLabel{Regime::Divergent, kInf};
      // Exactly at the threshold: labelled by the outcome of a long iteration.
      const Trace trace = rk_trace(params, 100'000);
      if (trace.divergent) return RegimeLabel{Regime::Divergent, kInf};
      return classify(trace.values.back());
    }
  }
  throw DomainError("unknown activation");
}

double erf_frontier_sigma_i(double sigma_r) {
  if (!std::isfinite(sigma_r) || sigma_r < erf_critical_sigma_r())
    throw DomainError("erf frontier is defined for sigma_r >= sqrt(pi)/2");
  constexpr double pi = std::numbers::pi;
  const double sr2 = sigma_r * sigma_r;
  const double delta = 16.0 * sr2 * sr2 / (pi * pi) - 1.0;
  // 4 sigma_i^2 = delta - 2 sqrt(1 + delta) asin(delta / (2 + delta)), which
  // is O(delta^3) near the anchor.
  double four_si2 = 0.0;
  if (std::abs(delta) < 1e-3) {
    const double d3 = delta * delta * delta;
    four_si2 = d3 * (1.0 / 12.0 - delta / 12.0 + 17.0 * delta * delta / 240.0 -
                     7.0 * delta * delta * delta / 120.0);
  } else {
    four_si2 = delta - 2.0 * std::sqrt(1.0 + delta) * std::asin(delta / (2.0 + delta));
  }
  return std::sqrt(std::max(0.0, 0.25 * four_si2));
}

double erf_frontier_sigma_r(double sigma_i, double tol) {
  if (!std::isfinite(sigma_i) || sigma_i < 0.0)
    throw DomainError("erf_frontier_sigma_r needs a finite sigma_i >= 0");
  if (!(tol > 0.0)) throw DomainError("erf_frontier_sigma_r: tolerance must be positive");
  double lo = erf_critical_sigma_r();
  if (erf_frontier_sigma_i(lo) >= sigma_i) return lo;
  double hi = 2.0 * lo;
  while (erf_frontier_sigma_i(hi) < sigma_i) {
    lo = hi;
    hi *= 2.0;
  }
  // Invariant: psi(lo) < sigma_i <= psi(hi).
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (erf_frontier_sigma_i(mid) < sigma_i)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double sign_limit_asymptotic(double sigma_r, double sigma_i) {
  if (!(sigma_i > 0.0)) throw DomainError("sign asymptotic limit needs sigma_i > 0");
  constexpr double pi = std::numbers::pi;
  return 16.0 * sigma_r * sigma_r / (pi * pi * sigma_i * sigma_i);
}

PhaseDiagram phase_diagram(Activation kind, const GridAxis& sigma_r, const GridAxis& sigma_i,
                           int t_max, double tol, unsigned jobs) {
  sigma_r.validate();
  sigma_i.validate();
  if (t_max < 1) throw DomainError("phase_diagram: t_max must be at least 1");
  if (!(tol > 0.0)) throw DomainError("phase_diagram: tolerance must be positive");

  PhaseDiagram diagram{kind, sigma_r, sigma_i, t_max, tol, {}};
  const auto cols = static_cast<std::size_t>(sigma_i.steps);
  diagram.cells.resize(static_cast<std::size_t>(sigma_r.steps) * cols);

  parallel_for(diagram.cells.size(), jobs, [&](std::size_t index) {
    PhaseCell& cell = diagram.cells[index];
    cell.sigma_r = sigma_r.at(static_cast<int>(index / cols));
    cell.sigma_i = sigma_i.at(static_cast<int>(index % cols));
    try {
      const Trace trace = rk_trace(HyperParams{kind, cell.sigma_r, cell.sigma_i}, t_max);
      if (trace.divergent) {
        cell.metric_final = kInf;
        cell.label = Regime::Divergent;
      } else {
        cell.metric_final = trace.values.back();
        cell.label = cell.metric_final <= tol ? Regime::Stable : Regime::Chaotic;
      }
    } catch (const std::exception& e) {
      cell.metric_final = kNaN;
      cell.label = Regime::Undefined;
      cell.error = e.what();
    }
  });
  return diagram;
}

}  // namespace rkstab
