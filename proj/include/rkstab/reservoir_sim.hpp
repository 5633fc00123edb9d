#ifndef RKSTAB_RESERVOIR_SIM_HPP
#define RKSTAB_RESERVOIR_SIM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rkstab/hyper_params.hpp"

namespace rkstab {

/// Fixed random weights of an echo-state network.
struct WeightSet {
  Eigen::MatrixXd w_r;  ///< N x N internal weights
  Eigen::MatrixXd w_i;  ///< N x d input weights
};

struct ReservoirState {
  Eigen::VectorXd x;
};

/// Unit-norm input vectors, one per time step.
struct InputSequence {
  std::vector<Eigen::VectorXd> steps;
};

/// Time-indexed scalar metric. `values[t]` is the metric at time t; when the
/// divergence guard trips the trace stops at the offending step and
/// `divergent` is set.
struct Trace {
  std::vector<double> values;
  std::string label;
  bool divergent = false;
};

/// Entries of the symmetric 2x2 Gram matrix of two states.
struct GramPair {
  double g_xx = 0.0;
  double g_xy = 0.0;
  double g_yy = 0.0;
};

/// Gaussian weights with variances sigma_r^2 and sigma_i^2. Deterministic in
/// `seed`; the two matrices are drawn from separate sub-streams.
WeightSet generate_weights(const SimConfig& config, const HyperParams& params,
                           std::uint64_t seed);

/// Independent uniform draws on the unit sphere of R^d.
InputSequence sample_input_sequence(int d, int t_max, std::uint64_t seed);

/// State with i.i.d. N(0, 1/n) entries, so that its squared norm is close to 1.
ReservoirState random_initial_state(int n, std::uint64_t seed);

/// Element-wise activation; sign(0) is 0.
double activate(Activation kind, double z);

/// x' = f(W_r x + W_i i) / sqrt(N). Throws DivergenceError if the result is
/// not finite.
ReservoirState step(const ReservoirState& state, const Eigen::VectorXd& input,
                    const WeightSet& weights, const HyperParams& params);

/// Two reservoirs with shared weights and inputs but independent initial
/// states. Records L(t) = |x1(t) - x2(t)|^2 for t = 0..t_max.
Trace run_twin_experiment(const SimConfig& config, const HyperParams& params,
                          std::uint64_t seed);

GramPair gram_of(const ReservoirState& x1, const ReservoirState& x2);

}  // namespace rkstab

#endif  // RKSTAB_RESERVOIR_SIM_HPP
