#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "rkstab/errors.hpp"
#include "rkstab/recurrent_kernel.hpp"
#include "rkstab/stability_analysis.hpp"

using namespace rkstab;

namespace {

constexpr double kTol = 1e-13;

// Smallest sigma_i in [0, hi] at which rk_limit reports Stable, by bisection.
double bisect_stable_sigma_i(double sigma_r, double hi, double width) {
  double lo = 0.0;
  REQUIRE(rk_limit({Activation::Erf, sigma_r, lo}, kDefaultStabilityTol).label == Regime::Chaotic);
  REQUIRE(rk_limit({Activation::Erf, sigma_r, hi}, kDefaultStabilityTol).label == Regime::Stable);
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    if (rk_limit({Activation::Erf, sigma_r, mid}, kDefaultStabilityTol).label == Regime::Stable)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("erf_fixed_point_a: subcritical input-free reservoir collapses to 0") {
  const HyperParams p{Activation::Erf, 0.85, 0.0};
  const FixedPointResult a = erf_fixed_point_a(p, kTol);
  CHECK(std::abs(a.value) <= kTol);
  CHECK(oracle::erf_twin_iterate(0.85, 0.0, 100'000).first <= kTol);
}

TEST_CASE("erf_fixed_point_a: supercritical and large-input cases") {
  const FixedPointResult a = erf_fixed_point_a({Activation::Erf, 1.05, 0.0}, kTol);
  CHECK(a.value > 0.1);
  CHECK(a.value == doctest::Approx(oracle::erf_twin_iterate(1.05, 0.0, 100'000).first).epsilon(1e-10));
  CHECK(a.residual <= kTol);
  CHECK(erf_fixed_point_a({Activation::Erf, 1.0, 100.0}, kTol).value > 0.99);
  CHECK_THROWS_AS(erf_fixed_point_a({Activation::Sign, 1.0, 0.0}, kTol), DomainError);
  CHECK_THROWS_AS(erf_fixed_point_a({Activation::Erf, 1.0, 0.5}, 0.0), DomainError);
}

TEST_CASE("erf fixed-point iterations are monotone") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> sig(0.2, 3.0);
  for (int trial = 0; trial < 30; ++trial) {
    const HyperParams p{Activation::Erf, sig(rng), sig(rng) - 0.2};
    std::vector<double> as, bs;
    const double a = erf_fixed_point_a(p, kTol, [&](double x) { as.push_back(x); }).value;
    erf_fixed_point_b(p, a, kTol, [&](double x) { bs.push_back(x); });
    for (std::size_t k = 1; k < as.size(); ++k) CHECK(as[k] <= as[k - 1]);
    for (std::size_t k = 1; k < bs.size(); ++k) CHECK(bs[k] >= bs[k - 1]);
    CHECK(bs.back() <= a);
  }
}

TEST_CASE("erf_fixed_point_b") {
  CHECK(erf_fixed_point_b({Activation::Erf, 0.85, 0.0}, 0.0, kTol).value == 0.0);

  // Chaotic: the coupled recurrence settles with a strict gap.
  const HyperParams chaotic{Activation::Erf, 2.0, 0.0};
  const double a = erf_fixed_point_a(chaotic, kTol).value;
  const double b = erf_fixed_point_b(chaotic, a, kTol).value;
  const auto [geq, gneq] = oracle::erf_twin_iterate(2.0, 0.0, 10'000);
  CHECK(b < a - 0.1);
  CHECK(a == doctest::Approx(geq).epsilon(1e-10));
  CHECK(std::abs(b - gneq) < 1e-10);

  // Stable with input: sigma_r <= sqrt(pi)/2 lies in the stable region.
  for (const double sr : {0.3, 0.6, 0.88}) {
    for (const double si : {0.1, 0.5, 2.0}) {
      const HyperParams p{Activation::Erf, sr, si};
      const double pa = erf_fixed_point_a(p, kTol).value;
      const double pb = erf_fixed_point_b(p, pa, kTol).value;
      CHECK(std::abs(pa - pb) <= 10 * kTol);
      const auto [e, ne] = oracle::erf_twin_iterate(sr, si, 20'000);
      CHECK(std::abs(e - ne) < 1e-9);
    }
  }
  CHECK_THROWS_AS(erf_fixed_point_b(chaotic, 1.5, kTol), DomainError);
}

TEST_CASE("rk_limit: examples per activation") {
  const RegimeLabel sign = rk_limit({Activation::Sign, 1.0, 0.0}, kDefaultStabilityTol);
  CHECK(sign.label == Regime::Chaotic);
  CHECK(sign.limit_value == 2.0);

  const RegimeLabel sign_trivial = rk_limit({Activation::Sign, 0.0, 1.0}, kDefaultStabilityTol);
  CHECK(sign_trivial.label == Regime::Stable);
  CHECK(sign_trivial.limit_value == 0.0);
  CHECK_THROWS_AS(rk_limit({Activation::Sign, 0.0, 0.0}, kDefaultStabilityTol), DomainError);

  for (const double si : {0.0, 0.7, 3.0}) {
    const RegimeLabel relu = rk_limit({Activation::ReLU, 1.3, si}, kDefaultStabilityTol);
    CHECK(relu.label == Regime::Stable);
    CHECK(relu.limit_value == 0.0);
    const RegimeLabel wild = rk_limit({Activation::ReLU, 1.5, si}, kDefaultStabilityTol);
    CHECK(wild.label == Regime::Divergent);
    CHECK(std::isinf(wild.limit_value));
  }

  const RegimeLabel erf = rk_limit({Activation::Erf, 1.05, 0.0}, kDefaultStabilityTol);
  CHECK(erf.label == Regime::Chaotic);
  CHECK(erf.limit_value > 0.0);
  CHECK(rk_limit({Activation::Erf, 0.85, 0.0}, kDefaultStabilityTol).label == Regime::Stable);
}

TEST_CASE("rk_limit: ReLU at exactly sqrt(2) is labelled by iteration") {
  const RegimeLabel r = rk_limit({Activation::ReLU, std::numbers::sqrt2, 0.0}, kDefaultStabilityTol);
  CHECK(r.label != Regime::Undefined);
  CHECK(r.limit_value >= 0.0);
}

TEST_CASE("ReLU classification flips once between 1.41 and 1.42") {
  for (const double si : {0.0, 0.5, 1.0, 2.0}) {
    int flips = 0;
    Regime prev = Regime::Stable;
    for (int k = 0; k <= 300; ++k) {
      const double sr = 1.0 + k * 0.002;
      const Regime now = rk_limit({Activation::ReLU, sr, si}, kDefaultStabilityTol).label;
      if (k > 0 && now != prev) {
        ++flips;
        CHECK(sr > 1.41);
        CHECK(sr - 0.002 < 1.42);
      }
      prev = now;
    }
    CHECK(flips == 1);
    CHECK(rk_limit({Activation::ReLU, 1.41, si}, kDefaultStabilityTol).label == Regime::Stable);
    CHECK(rk_limit({Activation::ReLU, 1.42, si}, kDefaultStabilityTol).label == Regime::Divergent);
  }
}

TEST_CASE("sign limit is positive whenever sigma_r > 0") {
  for (const double sr : {0.01, 0.25, 0.5, 1.0, 2.0, 4.0})
    for (const double si : {0.0, 0.1, 1.0, 5.0, 20.0})
      CHECK(rk_limit({Activation::Sign, sr, si}, kDefaultStabilityTol).limit_value > 0.0);
}

TEST_CASE("erf_frontier_sigma_i") {
  CHECK(erf_frontier_sigma_i(erf_critical_sigma_r()) <= 1e-9);
  // Frozen from bisection of the classification oracle (1e-4 wide).
  CHECK(erf_frontier_sigma_i(1.2) == doctest::Approx(0.256667).epsilon(1e-4));
  CHECK(std::abs(erf_frontier_sigma_i(1.2) - bisect_stable_sigma_i(1.2, 1.0, 1e-6)) < 1e-4);

  const double si = erf_frontier_sigma_i(2.0);
  CHECK(rk_limit({Activation::Erf, 2.0, si - 1e-3}, kDefaultStabilityTol).label == Regime::Chaotic);
  CHECK(rk_limit({Activation::Erf, 2.0, si + 1e-3}, kDefaultStabilityTol).label == Regime::Stable);

  CHECK_THROWS_AS(erf_frontier_sigma_i(0.88), DomainError);
  CHECK_THROWS_AS(erf_frontier_sigma_i(std::nan("")), DomainError);
}

TEST_CASE("erf frontier matches the expanded closed form away from the anchor") {
  const double pi = std::numbers::pi;
  for (const double sr : {0.9, 1.0, 1.5, 2.5, 4.0}) {
    const double s4 = std::pow(sr, 4);
    const double si2 = 4 * s4 / (pi * pi) - 0.25 -
                       (2 * sr * sr / pi) * std::asin((16 * s4 - pi * pi) / (16 * s4 + pi * pi));
    CHECK(erf_frontier_sigma_i(sr) == doctest::Approx(std::sqrt(si2)).epsilon(1e-9));
  }
}

TEST_CASE("erf_frontier_sigma_r") {
  CHECK(std::abs(erf_frontier_sigma_r(0.0) - std::sqrt(std::numbers::pi) / 2.0) <= 1e-9);
  double prev = erf_frontier_sigma_r(0.0);
  for (int k = 1; k <= 10; ++k) {
    const double next = erf_frontier_sigma_r(0.3 * k);
    CHECK(next > prev);
    prev = next;
  }
  CHECK(std::abs(erf_frontier_sigma_r(erf_frontier_sigma_i(1.2)) - 1.2) < 1e-3);
  CHECK(erf_frontier_sigma_r(0.256) == doctest::Approx(1.2).epsilon(1e-3));
  for (int k = 0; k < 16; ++k) {
    const double sr = 0.9 + 0.1 * k;
    CHECK(std::abs(erf_frontier_sigma_r(erf_frontier_sigma_i(sr)) - sr) < 1e-6);
  }
  CHECK_THROWS_AS(erf_frontier_sigma_r(-0.1), DomainError);
}

TEST_CASE("frontier agrees with the bisected classification flip") {
  for (int k = 0; k < 20; ++k) {
    const double sr = 0.9 + 1.6 * k / 19.0;
    const double analytic = erf_frontier_sigma_i(sr);
    CAPTURE(sr);
    CHECK(std::abs(bisect_stable_sigma_i(sr, analytic + 1.0, 1e-5) - analytic) < 1e-3);
  }
}

TEST_CASE("sign_limit_asymptotic") {
  CHECK(sign_limit_asymptotic(1.0, 10.0) == doctest::Approx(16.0 / (100.0 * std::numbers::pi * std::numbers::pi)));
  CHECK(sign_limit_asymptotic(1.0, 10.0) == doctest::Approx(0.016211).epsilon(1e-4));
  const double exact = rk_limit({Activation::Sign, 1.0, 10.0}, kDefaultStabilityTol).limit_value;
  CHECK(std::abs(exact - sign_limit_asymptotic(1.0, 10.0)) / exact < 0.1);
  CHECK(exact == doctest::Approx(2.0 * (1.0 - oracle::sign_neq_iterate(1.0, 10.0, 100'000))).epsilon(1e-9));
  CHECK(sign_limit_asymptotic(1.0, 1e6) < 1e-11);
  CHECK_THROWS_AS(sign_limit_asymptotic(1.0, 0.0), DomainError);
}

TEST_CASE("phase_diagram: erf input-free column flips between 0.85 and 1.05") {
  const PhaseDiagram d = phase_diagram(Activation::Erf, {0.85, 1.05, 2}, {0.0, 0.0, 1});
  REQUIRE(d.cells.size() == 2);
  CHECK(d.cells[0].label == Regime::Stable);
  CHECK(d.cells[1].label == Regime::Chaotic);
}

TEST_CASE("phase_diagram: sign has no stable cell for sigma_r > 0") {
  const PhaseDiagram d = phase_diagram(Activation::Sign, {0.0, 3.0, 13}, {0.0, 3.0, 13});
  for (const auto& cell : d.cells) {
    if (cell.sigma_r > 0.0) {
      CHECK(cell.label == Regime::Chaotic);
    } else if (cell.sigma_i > 0.0) {
      CHECK(cell.label == Regime::Stable);
    } else {
      CHECK(cell.label == Regime::Undefined);
      CHECK_FALSE(cell.error.empty());
    }
  }
}

TEST_CASE("phase_diagram: ReLU labels do not depend on sigma_i") {
  const PhaseDiagram d = phase_diagram(Activation::ReLU, {0.25, 2.0, 8}, {0.0, 2.0, 9});
  for (int r = 0; r < 8; ++r) {
    const Regime first = d.cells[r * 9].label;
    CAPTURE(d.cells[r * 9].sigma_r);
    for (int c = 1; c < 9; ++c) CHECK(d.cells[r * 9 + c].label == first);
  }
  CHECK(d.cells[0].label == Regime::Stable);
  CHECK(d.cells[7 * 9].label != Regime::Stable);
}

TEST_CASE("phase_diagram: results do not depend on the number of workers") {
  const GridAxis r{0.0, 2.5, 11}, i{0.0, 2.0, 9};
  const PhaseDiagram serial = phase_diagram(Activation::Erf, r, i, 200, 1e-6, 1);
  const PhaseDiagram parallel = phase_diagram(Activation::Erf, r, i, 200, 1e-6, 4);
  REQUIRE(serial.cells.size() == parallel.cells.size());
  for (std::size_t k = 0; k < serial.cells.size(); ++k) {
    CHECK(serial.cells[k].sigma_r == parallel.cells[k].sigma_r);
    CHECK(serial.cells[k].sigma_i == parallel.cells[k].sigma_i);
    CHECK(serial.cells[k].label == parallel.cells[k].label);
    CHECK(std::memcmp(&serial.cells[k].metric_final, &parallel.cells[k].metric_final, sizeof(double)) == 0);
  }
}

TEST_CASE("limits agree with long kernel traces") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> sig(0.0, 2.0);
  const Activation kinds[] = {Activation::Erf, Activation::Sign, Activation::ReLU};
  int compared = 0;
  for (int k = 0; k < 20; ++k) {
    const HyperParams p{kinds[k % 3], sig(rng), sig(rng)};
    const RegimeLabel limit = rk_limit(p, kDefaultStabilityTol);
    if (limit.label == Regime::Divergent) continue;
    const Trace tr = rk_trace(p, 2000);
    CAPTURE(p.sigma_r);
    CAPTURE(p.sigma_i);
    CHECK(std::abs(limit.limit_value - tr.values.back()) < 1e-4);
    ++compared;
  }
  CHECK(compared >= 15);
}

TEST_CASE("grid axes") {
  const GridAxis g = parse_grid_axis("0:2:101");
  CHECK(g.steps == 101);
  CHECK(g.at(0) == 0.0);
  CHECK(g.at(100) == 2.0);
  CHECK(g.at(50) == 1.0);
  CHECK(parse_grid_axis("0.5:0.5:1").values() == std::vector<double>{0.5});
  CHECK_THROWS_AS(parse_grid_axis("0:2"), DomainError);
  CHECK_THROWS_AS(parse_grid_axis("0:2:0"), DomainError);
  CHECK_THROWS_AS(parse_grid_axis("2:1:5"), DomainError);
  CHECK_THROWS_AS(parse_grid_axis("0:x:5"), DomainError);
  CHECK_THROWS_AS(parse_grid_axis("0:1:5:6"), DomainError);
}
