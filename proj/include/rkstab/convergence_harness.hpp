#ifndef RKSTAB_CONVERGENCE_HARNESS_HPP
#define RKSTAB_CONVERGENCE_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rkstab/grid.hpp"
#include "rkstab/hyper_params.hpp"
#include "rkstab/reservoir_sim.hpp"

namespace rkstab {

enum class CellFlag { Ok, Divergent, Error };

std::string_view to_string(CellFlag flag);

/// Squared Frobenius gap between the final finite-size Gram matrix and its
/// kernel limit for one (sigma_r, sigma_i, n, seed).
struct ConvergenceCell {
  double sigma_r = 0.0;
  double sigma_i = 0.0;
  int n = 0;
  double e_value = 0.0;  ///< +inf when divergent, NaN on error
  std::uint64_t seed = 0;
  CellFlag flag = CellFlag::Ok;
  std::string error;
};

inline constexpr int kDefaultConvergenceLength = 50;
inline constexpr int kDefaultInputDim = 10;

/// Drives two reservoirs with shared weights by independent input streams i
/// and j for t_len steps, iterates the general kernel recurrence from the
/// identity with the realized overlaps <i(t), j(t)>, and returns
/// E = |G - G_rk|_F^2 for the final Gram matrices.
ConvergenceCell run_convergence_cell(const HyperParams& params, int n, int t_len, int d,
                                     std::uint64_t seed);

/// Same as run_convergence_cell, also returning both final Gram matrices.
struct ConvergenceDetail {
  ConvergenceCell cell;
  GramPair reservoir;
  GramPair kernel;
};
ConvergenceDetail run_convergence_detail(const HyperParams& params, int n, int t_len, int d,
                                         std::uint64_t seed);

/// Core of run_convergence_cell on caller-supplied weights, input streams and
/// initial states. The kernel side always starts from the identity.
ConvergenceDetail compare_with_kernel(const HyperParams& params, const WeightSet& weights,
                                      const InputSequence& first, const InputSequence& second,
                                      ReservoirState x, ReservoirState y);

/// One cell per grid point, row-major (sigma_r outer). Cell (row, col) uses
/// seed mix(seed, row, col). Failures are recorded per cell.
std::vector<ConvergenceCell> convergence_sweep(Activation kind, const GridAxis& sigma_r,
                                               const GridAxis& sigma_i, int n, int t_len,
                                               std::uint64_t seed,
                                               int d = kDefaultInputDim, unsigned jobs = 1);

}  // namespace rkstab

#endif  // RKSTAB_CONVERGENCE_HARNESS_HPP
