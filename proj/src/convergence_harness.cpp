#include "rkstab/convergence_harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rkstab/errors.hpp"
#include "rkstab/recurrent_kernel.hpp"
#include "rkstab/seed.hpp"

namespace rkstab {

namespace {

double frobenius_gap_squared(const GramPair& g, const GramPair& h) {
  const double dxx = g.g_xx - h.g_xx;
  const double dxy = g.g_xy - h.g_xy;
  const double dyy = g.g_yy - h.g_yy;
  return dxx * dxx + 2.0 * dxy * dxy + dyy * dyy;
}

bool exceeds_guard(const GramPair& g) {
  return !(std::isfinite(g.g_xy) && g.g_xx <= kDivergenceGuard && g.g_yy <= kDivergenceGuard);
}

}  // namespace

std::string_view to_string(CellFlag flag) {
  switch (flag) {
    case CellFlag::Ok:
      return "ok";
    case CellFlag::Divergent:
      return "divergent";
    case CellFlag::Error:
      return "error";
  }
  return "error";
}

ConvergenceDetail compare_with_kernel(const HyperParams& params, const WeightSet& weights,
                                      const InputSequence& first, const InputSequence& second,
                                      ReservoirState x, ReservoirState y) {
  params.validate();
  if (first.steps.size() != second.steps.size())
    throw DomainError("input streams differ in length");

  ConvergenceDetail out;
  out.cell = ConvergenceCell{params.sigma_r, params.sigma_i, static_cast<int>(x.x.size()),
                             0.0,            0,              CellFlag::Ok,
                             {}};
  GramPairWithInputs rk;  // identity
  out.reservoir = gram_of(x, y);
  out.kernel = GramPair{rk.g_xx, rk.g_xy, rk.g_yy};

  const auto diverged = [&] {
    out.cell.flag = CellFlag::Divergent;
    out.cell.e_value = std::numeric_limits<double>::infinity();
    return out;
  };

  for (std::size_t t = 0; t < first.steps.size(); ++t) {
    try {
      x = step(x, first.steps[t], weights, params);
      y = step(y, second.steps[t], weights, params);
    } catch (const DivergenceError&) {
      return diverged();
    }
    rk.input_overlap = std::clamp(first.steps[t].dot(second.steps[t]), -1.0, 1.0);
    rk = rk_step_general(rk, params);
    out.reservoir = gram_of(x, y);
    out.kernel = GramPair{rk.g_xx, rk.g_xy, rk.g_yy};
    if (exceeds_guard(out.reservoir) || exceeds_guard(out.kernel)) return diverged();
  }
  out.cell.e_value = frobenius_gap_squared(out.reservoir, out.kernel);
  if (!std::isfinite(out.cell.e_value)) return diverged();
  return out;
}

ConvergenceDetail run_convergence_detail(const HyperParams& params, int n, int t_len, int d,
                                         std::uint64_t seed) {
  const SimConfig config{n, d, t_len, seed};
  config.validate();
  params.validate();
  const WeightSet weights = generate_weights(config, params, seed);
  ConvergenceDetail out = compare_with_kernel(
      params, weights, sample_input_sequence(d, t_len, derive_seed(seed, Stream::InputsFirst)),
      sample_input_sequence(d, t_len, derive_seed(seed, Stream::InputsSecond)),
      random_initial_state(n, derive_seed(seed, Stream::InitFirst)),
      random_initial_state(n, derive_seed(seed, Stream::InitSecond)));
  out.cell.seed = seed;
  return out;
}

ConvergenceCell run_convergence_cell(const HyperParams& params, int n, int t_len, int d,
                                     std::uint64_t seed) {
  return run_convergence_detail(params, n, t_len, d, seed).cell;
}

std::vector<ConvergenceCell> convergence_sweep(Activation kind, const GridAxis& sigma_r,
                                               const GridAxis& sigma_i, int n, int t_len,
                                               std::uint64_t seed, int d, unsigned jobs) {
  sigma_r.validate();
  sigma_i.validate();
  const auto cols = static_cast<std::size_t>(sigma_i.steps);
  std::vector<ConvergenceCell> cells(static_cast<std::size_t>(sigma_r.steps) * cols);

  parallel_for(cells.size(), jobs, [&](std::size_t index) {
    const auto row = index / cols;
    const auto col = index % cols;
    const HyperParams params{kind, sigma_r.at(static_cast<int>(row)),
                             sigma_i.at(static_cast<int>(col))};
    const std::uint64_t cell_seed = mix(seed, row, col);
    try {
      cells[index] = run_convergence_cell(params, n, t_len, d, cell_seed);
    } catch (const std::exception& e) {
      cells[index] = ConvergenceCell{params.sigma_r, params.sigma_i, n,
                                     std::numeric_limits<double>::quiet_NaN(), cell_seed,
                                     CellFlag::Error, e.what()};
    }
  });
  return cells;
}

}  // namespace rkstab
