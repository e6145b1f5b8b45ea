#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "trajgeom/errors.hpp"
#include "trajgeom/optim.hpp"
#include "trajgeom/random.hpp"

using namespace trajgeom;

TEST(Sgd, ZeroGradientAndZeroStep) {
  const ParamVector w{1.5, -2};
  EXPECT_TRUE(sgd_step(w, ParamVector::zeros(2), 0.3).bitwise_equal(w));
  EXPECT_TRUE(sgd_step(w, ParamVector{4, 5}, 0.0).bitwise_equal(w));
}

TEST(Sgd, HandArithmetic) {
  EXPECT_EQ(sgd_step(ParamVector{1, 1}, ParamVector{1, 0}, 0.5), (ParamVector{0.5, 1}));
}

TEST(Sgd, DimensionMismatch) {
  EXPECT_THROW(sgd_step(ParamVector{1, 1}, ParamVector{1}, 0.1), DimensionError);
  OptimizerState st({}, 2);
  ParamVector w{1, 2};
  EXPECT_THROW(st.step(w, ParamVector{1}, 0.1), DimensionError);
}

TEST(Momentum, FirstStepIsSgd) {
  OptimizerConfig c;
  c.kind = OptimizerKind::momentum;
  OptimizerState st(c, 3);
  const ParamVector w{1, 2, 3}, g{0.5, -1, 2};
  EXPECT_TRUE(momentum_step(st, w, g, 0.1).bitwise_equal(sgd_step(w, g, 0.1)));
}

TEST(Momentum, TwoStepsHandArithmetic) {
  OptimizerConfig c;
  c.kind = OptimizerKind::momentum;
  OptimizerState st(c, 1);
  ParamVector w{0.0};
  st.step(w, ParamVector{1.0}, 1.0);
  EXPECT_EQ(w[0], -1.0);
  const double before = w[0];
  st.step(w, ParamVector{1.0}, 1.0);
  EXPECT_DOUBLE_EQ(w[0] - before, -1.9);
}

TEST(Momentum, VelocityDecaysGeometrically) {
  OptimizerConfig c;
  c.kind = OptimizerKind::momentum;
  OptimizerState st(c, 2);
  ParamVector w{0, 0};
  st.step(w, ParamVector{3, 4}, 0.1);
  double prev = std::hypot(st.velocity()[0], st.velocity()[1]);
  for (int k = 0; k < 10; ++k) {
    st.step(w, ParamVector::zeros(2), 0.1);
    const double now = std::hypot(st.velocity()[0], st.velocity()[1]);
    EXPECT_NEAR(now, 0.9 * prev, 1e-15 * prev);
    prev = now;
  }
}

TEST(Momentum, BetaZeroIsBitwiseSgd) {
  OptimizerConfig c;
  c.kind = OptimizerKind::momentum;
  c.momentum = 0.0;
  OptimizerState st(c, 16);
  RandomStream r(1, "trials");
  std::vector<double> v(16);
  for (auto& x : v) x = r.gauss();
  ParamVector w(v), ref(v);
  for (int k = 0; k < 50; ++k) {
    for (auto& x : v) x = r.gauss();
    const ParamVector g(v);
    const double eta = 0.01 * (1 + k % 3);
    st.step(w, g, eta);
    ref = sgd_step(ref, g, eta);
    ASSERT_TRUE(w.bitwise_equal(ref)) << "step " << k;
  }
}

TEST(Adam, FirstStepHandArithmetic) {
  OptimizerConfig c;
  c.kind = OptimizerKind::adam;
  OptimizerState st(c, 1);
  const auto w = adam_step(st, ParamVector{0.0}, ParamVector{2.0}, 0.1);
  EXPECT_NEAR(w[0], -0.1 * (2.0 / (2.0 + 1e-8)), 1e-17);
  EXPECT_EQ(st.steps_taken(), 1u);
}

TEST(Adam, ZeroGradientFirstStepLeavesW) {
  OptimizerConfig c;
  c.kind = OptimizerKind::adam;
  OptimizerState st(c, 2);
  const ParamVector w{1, -1};
  EXPECT_TRUE(adam_step(st, w, ParamVector::zeros(2), 0.1).bitwise_equal(w));
}

TEST(Adam, FirstStepScaleInvariant) {
  OptimizerConfig c;
  c.kind = OptimizerKind::adam;
  OptimizerState a(c, 3), b(c, 3);
  const ParamVector w{0, 0, 0};
  const auto wa = adam_step(a, w, ParamVector{0.1, -0.2, 0.3}, 0.01);
  const auto wb = adam_step(b, w, ParamVector{100, -200, 300}, 0.01);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(wa[i], wb[i], 1e-8);
}

TEST(Adam, UpdateBoundedAndFinite) {
  OptimizerConfig c;
  c.kind = OptimizerKind::adam;
  OptimizerState st(c, 8);
  RandomStream r(2, "trials");
  ParamVector w = ParamVector::zeros(8);
  const double eta = 0.01;
  for (int k = 0; k < 200; ++k) {
    std::vector<double> v(8);
    for (auto& x : v) x = r.gauss() * std::pow(10.0, static_cast<double>(k % 7) - 3);
    const ParamVector before = w;
    st.step(w, ParamVector(v), eta);
    ASSERT_TRUE(w.all_finite());
    for (int i = 0; i < 8; ++i) {
      ASSERT_LE(std::abs(w[i] - before[i]), eta / (1 - c.beta1) + 1e-15);
    }
  }
}

TEST(Schedule, Constant) {
  Schedule s{ScheduleKind::constant, 0.3, 0, 10};
  for (std::size_t e = 0; e < 10; ++e) EXPECT_EQ(schedule_lr(s, e), 0.3);
}

TEST(Schedule, WarmupCosine) {
  Schedule s{ScheduleKind::warmup_cosine, 1.0, 3, 90};
  EXPECT_DOUBLE_EQ(schedule_lr(s, 0), 1.0 / 3);
  EXPECT_DOUBLE_EQ(schedule_lr(s, 1), 2.0 / 3);
  EXPECT_EQ(schedule_lr(s, 3), 1.0);
  const double last = schedule_lr(s, 89);
  EXPECT_DOUBLE_EQ(last, 0.5 * (1 + std::cos(std::numbers::pi * 86.0 / 87.0)));
  EXPECT_LT(last, 1e-3);
  for (std::size_t e = 0; e < 90; ++e) EXPECT_GE(schedule_lr(s, e), 0.0);
}

TEST(Schedule, LinearDecay) {
  Schedule s{ScheduleKind::linear_decay, 0.2, 0, 4};
  EXPECT_EQ(schedule_lr(s, 0), 0.2);
  EXPECT_DOUBLE_EQ(schedule_lr(s, 2), 0.1);
  EXPECT_DOUBLE_EQ(schedule_lr(s, 3), 0.05);
}

TEST(Schedule, Errors) {
  Schedule s{ScheduleKind::constant, 0.1, 0, 5};
  EXPECT_THROW(schedule_lr(s, 5), Error);
  Schedule bad{ScheduleKind::warmup_cosine, 0.1, 5, 5};
  EXPECT_THROW(bad.validate(), Error);
  Schedule neg{ScheduleKind::constant, -0.1, 0, 5};
  EXPECT_THROW(neg.validate(), Error);
}

TEST(Optimizer, ParseNames) {
  EXPECT_EQ(parse_optimizer_kind("adam"), OptimizerKind::adam);
  EXPECT_EQ(to_string(OptimizerKind::momentum), "momentum");
  EXPECT_THROW(parse_optimizer_kind("nesterov"), Error);
  EXPECT_EQ(parse_schedule_kind("warmup_cosine"), ScheduleKind::warmup_cosine);
}
