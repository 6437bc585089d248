#include <stdexcept>
#include <cmath>
#include <vector>

#include "ciosl/metrics.hpp"
#include "ciosl/random.hpp"
#include "doctest.h"

using namespace ciosl;

TEST_SUITE("metrics") {

TEST_CASE("omega_all: hand-computed values") {
  SUBCASE("matching traces give exactly 1") {
    EvalTrace t{{0.4, 0.7, 0.9}, {0.4, 0.7, 0.9}};
    CHECK(omega_all(t) == 1.0);
  }
  SUBCASE("[0.5, 1.0] against ones is 0.75") {
    EvalTrace t{{0.5, 1.0}, {1.0, 1.0}};
    CHECK(std::abs(omega_all(t) - 0.75) < 1e-12);
  }
  SUBCASE("empty trace throws") {
    CHECK_THROWS_AS(omega_all(EvalTrace{}), std::invalid_argument);
  }
  SUBCASE("zero offline accuracy throws") {
    EvalTrace t{{0.5}, {0.0}};
    CHECK_THROWS_AS(omega_all(t), std::invalid_argument);
  }
  SUBCASE("length mismatch throws") {
    EvalTrace t{{0.5, 0.6}, {1.0}};
    CHECK_THROWS_AS(omega_all(t), std::invalid_argument);
  }
}

TEST_CASE("omega_all: scale consistency") {
  RandomSource rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    EvalTrace t;
    const std::size_t n = 1 + rng.below(10);
    for (std::size_t i = 0; i < n; ++i) {
      t.alpha.push_back(rng.uniform01());
      t.alpha_offline.push_back(0.1 + 0.9 * rng.uniform01());
    }
    const double base = omega_all(t);
    const double c = 0.25 + rng.uniform01();
    EvalTrace scaled = t;
    for (double& a : scaled.alpha) a *= c;
    for (double& a : scaled.alpha_offline) a *= c;
    CHECK(omega_all(scaled) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("omega_all: may exceed 1 and is not clamped") {
  EvalTrace t{{0.9, 0.8}, {0.6, 0.8}};
  CHECK(omega_all(t) > 1.0);
}

TEST_CASE("offline_mean") {
  CHECK(offline_mean({0.8, 0.8, 0.8}) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(offline_mean({0.6, 1.0}) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(offline_mean({0.42}) == 0.42);
  CHECK_THROWS_AS(offline_mean({}), std::invalid_argument);
}

TEST_CASE("mean_sd") {
  const MeanSd single = mean_sd({2.0});
  CHECK(single.mean == 2.0);
  CHECK(single.sd == 0.0);
  const MeanSd pair = mean_sd({1.0, 3.0});
  CHECK(pair.mean == doctest::Approx(2.0));
  CHECK(pair.sd == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(mean_sd({}), std::invalid_argument);
}

}  // TEST_SUITE
