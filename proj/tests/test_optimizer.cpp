#include "doctest.h"
#include "dsgd/errors.hpp"
#include "dsgd/optimizer.hpp"

using namespace dsgd;

TEST_CASE("lr_at milestone decay") {
  OptimizerConfig c;
  c.base_lr = 0.1;
  c.milestones = {150, 180};
  CHECK(lr_at(c, 0) == 0.1);
  CHECK(lr_at(c, 149) == 0.1);
  CHECK(lr_at(c, 150) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(lr_at(c, 179) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(lr_at(c, 180) == doctest::Approx(0.001).epsilon(1e-15));
  c.milestones.clear();
  for (int e : {0, 10, 1000}) CHECK(lr_at(c, e) == 0.1);
  CHECK_THROWS_AS(lr_at(c, -1), std::invalid_argument);
}

TEST_CASE("plain SGD when momentum and decay are off") {
  OptimizerConfig c;
  c.momentum = 0.0;
  c.weight_decay = 0.0;
  NesterovSgd opt(c, 3);
  ParamVector x{1.0, -2.0, 0.5};
  opt.step(x, {0.5, 0.25, -1.0}, 0.1);
  CHECK(x == ParamVector{1.0 - 0.1 * 0.5, -2.0 - 0.1 * 0.25, 0.5 + 0.1 * 1.0});
}

TEST_CASE("Nesterov recurrence, two steps with constant gradient") {
  // u1 = G, step1 = -lr (G + 0.9 G); u2 = 1.9 G, step2 = -lr (G + 1.71 G).
  OptimizerConfig c;
  c.momentum = 0.9;
  c.weight_decay = 0.0;
  NesterovSgd opt(c, 1);
  const double lr = 0.1, g = 2.0;
  ParamVector x{0.0};
  opt.step(x, {g}, lr);
  CHECK(opt.buffer()[0] == doctest::Approx(g).epsilon(1e-15));
  CHECK(x[0] == doctest::Approx(-lr * 1.9 * g).epsilon(1e-14));
  opt.step(x, {g}, lr);
  CHECK(opt.buffer()[0] == doctest::Approx(1.9 * g).epsilon(1e-15));
  CHECK(x[0] == doctest::Approx(-lr * 1.9 * g - lr * 2.71 * g).epsilon(1e-14));
}

TEST_CASE("zero gradient is a fixed point") {
  OptimizerConfig c;
  c.weight_decay = 0.0;
  NesterovSgd opt(c, 2);
  ParamVector x{3.0, -4.0};
  for (int i = 0; i < 5; ++i) opt.step(x, {0.0, 0.0}, 0.1);
  CHECK(x == ParamVector{3.0, -4.0});
}

TEST_CASE("coupled weight decay and bias exclusion") {
  OptimizerConfig c;
  c.momentum = 0.0;
  c.weight_decay = 0.5;
  NesterovSgd all(c, 2);
  ParamVector x{2.0, 2.0};
  all.step(x, {0.0, 0.0}, 0.1);
  CHECK(x == ParamVector{2.0 - 0.1, 2.0 - 0.1});

  c.decay_biases = false;
  NesterovSgd weights_only(c, 2, {false, true});
  ParamVector y{2.0, 2.0};
  weights_only.step(y, {0.0, 0.0}, 0.1);
  CHECK(y == ParamVector{2.0 - 0.1, 2.0});
}

TEST_CASE("momentum buffer stays bounded under bounded gradients") {
  OptimizerConfig c;
  c.momentum = 0.9;
  c.weight_decay = 0.0;
  NesterovSgd opt(c, 1);
  ParamVector x{0.0};
  for (int i = 0; i < 500; ++i) {
    opt.step(x, {(i % 3 == 0) ? 1.0 : -0.5}, 0.01);
    REQUIRE(std::abs(opt.buffer()[0]) <= 1.0 / (1.0 - 0.9) + 1e-12);
  }
}

TEST_CASE("optimizer validation") {
  OptimizerConfig c;
  c.momentum = 1.0;
  CHECK_THROWS_AS(c.check(), std::invalid_argument);
  c = {};
  c.base_lr = 0.0;
  CHECK_THROWS_AS(c.check(), std::invalid_argument);
  c = {};
  c.weight_decay = -1.0;
  CHECK_THROWS_AS(c.check(), std::invalid_argument);
  c = {};
  c.decay_factor = 0.0;
  CHECK_THROWS_AS(c.check(), std::invalid_argument);
  NesterovSgd opt(OptimizerConfig{}, 2);
  ParamVector x{1.0, 2.0};
  CHECK_THROWS_AS(opt.step(x, {1.0}, 0.1), DimensionError);
  CHECK_THROWS_AS(NesterovSgd(OptimizerConfig{}, 2, {true}), DimensionError);
}
