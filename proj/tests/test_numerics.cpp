#include <algorithm>
#include <random>

#include "doctest.h"
#include "dsgd/errors.hpp"
#include "dsgd/numerics.hpp"
#include "test_support.hpp"

using namespace dsgd;

TEST_CASE("add_scaled") {
  CHECK(add_scaled({1, 2}, {3, 4}, 0.0) == ParamVector{1, 2});
  CHECK(add_scaled({1, 2}, {3, 4}, 1.0) == ParamVector{4, 6});
  CHECK(add_scaled({0, 0}, {2, -2}, 0.5) == ParamVector{1, -1});
  CHECK_THROWS_AS(add_scaled({1, 2}, {1}, 1.0), DimensionError);
}

TEST_CASE("norm_sq") {
  CHECK(norm_sq({0, 0, 0}) == 0.0);
  CHECK(norm_sq({3, 4}) == 25.0);
  CHECK(norm_sq({1, 1, 1, 1}) == 4.0);
}

TEST_CASE("mean_of") {
  const std::vector<ParamVector> two{{0}, {2}};
  CHECK(mean_of(two) == ParamVector{1});
  const std::vector<ParamVector> one{{1, 2}};
  CHECK(mean_of(one) == ParamVector{1, 2});
  const std::vector<ParamVector> three{{1, 0}, {0, 1}, {2, 2}};
  CHECK(mean_of(three) == ParamVector{1, 1});
  CHECK_THROWS_AS(mean_of(std::vector<ParamVector>{}), std::invalid_argument);
  const std::vector<ParamVector> ragged{{1, 2}, {1}};
  CHECK_THROWS_AS(mean_of(ragged), DimensionError);
}

TEST_CASE("add_scaled then subtract returns to start") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> scale(-10.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto v = testing::random_params(64, rng, 5.0);
    const auto w = testing::random_params(64, rng, 5.0);
    const double s = scale(rng);
    const auto back = add_scaled(add_scaled(v, w, s), w, -s);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double bound = 1e-12 * std::max({1.0, std::abs(v[i]), std::abs(s * w[i])});
      REQUIRE(std::abs(back[i] - v[i]) <= bound);
    }
  }
}

TEST_CASE("mean_of is permutation invariant") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ParamVector> vs;
    for (int k = 0; k < 7; ++k) vs.push_back(testing::random_params(32, rng));
    const auto ref = mean_of(vs);
    std::shuffle(vs.begin(), vs.end(), rng);
    const auto shuffled = mean_of(vs);
    for (std::size_t i = 0; i < ref.size(); ++i) REQUIRE(shuffled[i] == doctest::Approx(ref[i]).epsilon(1e-14));
    // Same order, same bits.
    REQUIRE(mean_of(vs) == shuffled);
  }
}

TEST_CASE("all_finite") {
  CHECK(all_finite({1, 2}));
  CHECK_FALSE(all_finite({1, std::nan("")}));
  CHECK_FALSE(all_finite({INFINITY}));
}
