#include "rkstab/reservoir_sim.hpp"

#include <cmath>
#include <random>

#include "rkstab/errors.hpp"
#include "rkstab/seed.hpp"

namespace rkstab {

namespace {

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double stddev,
                                std::uint64_t seed) {
  if (stddev == 0.0) return Eigen::MatrixXd::Zero(rows, cols);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  Eigen::MatrixXd m(rows, cols);
  // Row-major fill order so that row j depends only on the first j+1 rows of
  // draws regardless of Eigen's storage order.
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = normal(rng);
  return m;
}

}  // namespace

WeightSet generate_weights(const SimConfig& config, const HyperParams& params,
                           std::uint64_t seed) {
  config.validate();
  params.validate();
  return WeightSet{
      gaussian_matrix(config.n, config.n, params.sigma_r,
                      derive_seed(seed, Stream::InternalWeights)),
      gaussian_matrix(config.n, config.d, params.sigma_i,
                      derive_seed(seed, Stream::InputWeights)),
  };
}

InputSequence sample_input_sequence(int d, int t_max, std::uint64_t seed) {
  if (d < 1) throw DomainError("input dimension d must be at least 1");
  if (t_max < 0) throw DomainError("sequence length must be nonnegative");
  Rng rng(seed);
  std::normal_distribution<double> normal;
  InputSequence seq;
  seq.steps.reserve(static_cast<std::size_t>(t_max));
  Eigen::VectorXd v(d);
  for (int t = 0; t < t_max; ++t) {
    double norm = 0.0;
    do {
      for (int k = 0; k < d; ++k) v[k] = normal(rng);
      norm = v.norm();
    } while (norm == 0.0);
    seq.steps.emplace_back(v / norm);
  }
  return seq;
}

ReservoirState random_initial_state(int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("reservoir size n must be at least 1");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(n)));
  ReservoirState s{Eigen::VectorXd(n)};
  for (int k = 0; k < n; ++k) s.x[k] = normal(rng);
  return s;
}

double activate(Activation kind, double z) {
  switch (kind) {
    case Activation::Erf:
      return std::erf(z);
    case Activation::Sign:
      return static_cast<double>((z > 0.0) - (z < 0.0));
    case Activation::ReLU:
      return z > 0.0 ? z : 0.0;
  }
  return z;
}

ReservoirState step(const ReservoirState& state, const Eigen::VectorXd& input,
                    const WeightSet& weights, const HyperParams& params) {
  const auto n = state.x.size();
  if (weights.w_r.rows() != n || weights.w_r.cols() != n || weights.w_i.rows() != n ||
      weights.w_i.cols() != input.size())
    throw DomainError("reservoir step: inconsistent dimensions");

  Eigen::VectorXd pre = weights.w_r * state.x + weights.w_i * input;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  ReservoirState next{pre.unaryExpr([&](double z) { return scale * activate(params.activation, z); })};
  if (!next.x.allFinite()) throw DivergenceError("reservoir state is not finite");
  return next;
}

Trace run_twin_experiment(const SimConfig& config, const HyperParams& params,
                          std::uint64_t seed) {
  config.validate();
  params.validate();
  const WeightSet weights = generate_weights(config, params, seed);
  const InputSequence inputs =
      sample_input_sequence(config.d, config.t_max, derive_seed(seed, Stream::InputsFirst));
  ReservoirState x1 = random_initial_state(config.n, derive_seed(seed, Stream::InitFirst));
  ReservoirState x2 = random_initial_state(config.n, derive_seed(seed, Stream::InitSecond));

  Trace trace;
  trace.label = "L";
  trace.values.reserve(static_cast<std::size_t>(config.t_max) + 1);
  trace.values.push_back((x1.x - x2.x).squaredNorm());
  for (int t = 0; t < config.t_max; ++t) {
    try {
      x1 = step(x1, inputs.steps[t], weights, params);
      x2 = step(x2, inputs.steps[t], weights, params);
    } catch (const DivergenceError&) {
      trace.divergent = true;
      break;
    }
    const double metric = (x1.x - x2.x).squaredNorm();
    if (!std::isfinite(metric) || metric > kDivergenceGuard) {
      trace.divergent = true;
      break;
    }
    trace.values.push_back(metric);
  }
  return trace;
}

GramPair gram_of(const ReservoirState& x1, const ReservoirState& x2) {
  if (x1.x.size() != x2.x.size()) throw DomainError("gram_of: states differ in length");
  return GramPair{x1.x.squaredNorm(), x1.x.dot(x2.x), x2.x.squaredNorm()};
}

}  // namespace rkstab
