#include <random>
#include <sstream>

#include "doctest.h"
#include "dsgd/errors.hpp"
#include "dsgd/topology.hpp"
#include "test_support.hpp"

using namespace dsgd;

TEST_CASE("ring of 16 has three 1/3 entries per row") {
  const auto w = build_ring(16);
  for (std::size_t i = 0; i < 16; ++i) {
    int thirds = 0;
    for (std::size_t j = 0; j < 16; ++j) {
      const bool adjacent = j == i || j == (i + 1) % 16 || j == (i + 15) % 16;
      if (adjacent) {
        CHECK(w.weight(i, j) == 1.0 / 3.0);
        ++thirds;
      } else {
        CHECK(w.weight(i, j) == 0.0);
      }
    }
    CHECK(thirds == 3);
    CHECK(w.neighbors(i).size() == 3);
  }
  CHECK(validate(w).ok());
}

TEST_CASE("small rings") {
  CHECK(build_ring(1).dense() == std::vector<double>{1.0});
  CHECK(build_ring(2).dense() == std::vector<double>{0.5, 0.5, 0.5, 0.5});
  CHECK(build_ring(3) == build_complete(3));
  const auto ring3 = build_ring(3);
  for (double x : ring3.dense()) CHECK(x == 1.0 / 3.0);
  CHECK_THROWS_AS(build_ring(0), std::invalid_argument);
}

TEST_CASE("complete graph") {
  CHECK(build_complete(2).dense() == std::vector<double>{0.5, 0.5, 0.5, 0.5});
  const auto complete4 = build_complete(4);
  for (double x : complete4.dense()) CHECK(x == 0.25);
  CHECK(build_complete(1).dense() == std::vector<double>{1.0});
  CHECK_THROWS_AS(build_complete(0), std::invalid_argument);
}

TEST_CASE("validate flags violations") {
  SUBCASE("constructors pass") {
    for (std::size_t n : {1, 2, 3, 4, 16, 48}) {
      CHECK(validate(build_ring(n)).ok());
      CHECK(validate(build_complete(n)).ok());
    }
  }
  SUBCASE("identity on two agents is disconnected") {
    const auto r = validate(MixingMatrix(2, {1, 0, 0, 1}));
    CHECK(r.violations == std::vector<Violation>{Violation::disconnected});
  }
  SUBCASE("asymmetric matrix with bad column sums") {
    const auto r = validate(MixingMatrix(2, {0.6, 0.4, 0.5, 0.5}));
    CHECK(r.has(Violation::asymmetric));
    CHECK(r.has(Violation::column_sum));
    CHECK_FALSE(r.has(Violation::row_sum));
    CHECK_FALSE(r.has(Violation::disconnected));
  }
  SUBCASE("negative entry and missing self loop") {
    const auto r = validate(MixingMatrix(2, {0.0, 1.0, 1.0, 0.0}));
    CHECK(r.has(Violation::missing_self_loop));
    const auto neg = validate(MixingMatrix(2, {1.5, -0.5, -0.5, 1.5}));
    CHECK(neg.has(Violation::negative_entry));
  }
  SUBCASE("row sum drift beyond 1e-12") {
    const auto r = validate(MixingMatrix(1, {1.0 + 1e-10}));
    CHECK(r.has(Violation::row_sum));
    CHECK(validate(MixingMatrix(1, {1.0 + 1e-14})).ok());
  }
}

TEST_CASE("doubly-stochastic weights conserve the sum of neighbor differences") {
  std::mt19937_64 rng(21);
  for (std::size_t n : {1, 2, 3, 5, 16}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto w = testing::random_preset_matrix(n, rng);
      std::vector<ParamVector> xs;
      for (std::size_t i = 0; i < n; ++i) xs.push_back(testing::random_params(50, rng, 3.0));
      for (std::size_t k = 0; k < 50; ++k) {
        double total = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            total += w.weight(i, j) * (xs[j][k] - xs[i][k]);
            scale += std::abs(w.weight(i, j) * xs[j][k]);
          }
        }
        REQUIRE(std::abs(total) <= 1e-9 * std::max(1.0, scale));
      }
    }
  }
}

TEST_CASE("matrix file round trip and errors") {
  const auto w = build_ring(5);
  std::stringstream buf;
  write_mixing_matrix(buf, w);
  CHECK(read_mixing_matrix(buf) == w);

  std::istringstream custom("2\n0.5 0.5\n0.5 0.5\n");
  CHECK(read_mixing_matrix(custom) == build_complete(2));

  std::istringstream short_file("2\n0.5 0.5\n0.5\n");
  CHECK_THROWS_AS(read_mixing_matrix(short_file), std::invalid_argument);
  std::istringstream zero("0\n");
  CHECK_THROWS_AS(read_mixing_matrix(zero), std::invalid_argument);
  std::istringstream trailing("1\n1\n7\n");
  CHECK_THROWS_AS(read_mixing_matrix(trailing), std::invalid_argument);
  CHECK_THROWS_AS(MixingMatrix(2, {1, 0, 0}), DimensionError);
}
