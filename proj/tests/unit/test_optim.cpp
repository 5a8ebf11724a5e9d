#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "tvgnn/errors.hpp"
#include "tvgnn/optim.hpp"

using namespace tvgnn;

TEST(Adam, ZeroGradientAndNoDecayLeavesParameters) {
  ParamStore store;
  store.add("w", Tensor::from_rows({{1.5, -2.0}}));
  AdamState st;
  AdamConfig cfg;
  cfg.weight_decay = 0.0;
  store.zero_grad();
  store.get("w").node()->grad_buffer();
  adam_step(store, st, cfg);
  EXPECT_EQ(store.get("w").value(), Tensor::from_rows({{1.5, -2.0}}));
  EXPECT_EQ(st.step, 1);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  for (double g : {3.0, -0.02}) {
    ParamStore store;
    store.add("w", Tensor::from_rows({{1.0}}));
    store.get("w").node()->grad_buffer()[0] = g;
    AdamState st;
    AdamConfig cfg;
    cfg.lr = 0.01;
    cfg.weight_decay = 0.0;
    adam_step(store, st, cfg);
    EXPECT_NEAR(store.get("w").value()[0], 1.0 - 0.01 * (g > 0 ? 1 : -1), 1e-6);
  }
}

TEST(Adam, DecreasesQuadraticLoss) {
  ParamStore store;
  auto w = store.add("w", Tensor::from_rows({{1.0}}));
  AdamState st;
  AdamConfig cfg;
  cfg.lr = 0.05;
  double prev = 1.0;
  for (int i = 0; i < 10; ++i) {
    store.zero_grad();
    const auto loss = ag::sum_all(ag::mul(w, w));
    ag::backward(loss);
    adam_step(store, st, cfg);
    const double now = w.value()[0] * w.value()[0];
    EXPECT_LT(now, prev);
    prev = now;
  }
}

TEST(Adam, WeightDecayShrinksMultiplicatively) {
  ParamStore store;
  store.add("w", Tensor::from_rows({{2.0}}));
  store.get("w").node()->grad_buffer();
  AdamState st;
  AdamConfig cfg;
  cfg.lr = 0.1;
  cfg.weight_decay = 0.5;
  adam_step(store, st, cfg);
  EXPECT_DOUBLE_EQ(store.get("w").value()[0], 2.0 * (1.0 - 0.1 * 0.5));
}

TEST(Adam, NonFiniteGradientNamesParameter) {
  ParamStore store;
  store.add("ok", Tensor::from_rows({{1.0}}));
  store.add("bad", Tensor::from_rows({{1.0}}));
  store.get("bad").node()->grad_buffer()[0] = std::numeric_limits<double>::quiet_NaN();
  AdamState st;
  try {
    adam_step(store, st, {});
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
  }
}

TEST(Adam, MomentsShapedLikeParameters) {
  ParamStore store;
  store.add("a", Tensor::matrix(2, 3));
  store.add("b", Tensor::matrix(1, 4));
  AdamState st;
  adam_step(store, st, {});
  ASSERT_EQ(st.m.size(), 2u);
  EXPECT_EQ(st.m[0].shape(), (Shape{2, 3}));
  EXPECT_EQ(st.v[1].shape(), (Shape{1, 4}));
  st.reset();
  EXPECT_EQ(st.step, 0);
  EXPECT_TRUE(st.m.empty());
}
