#include <doctest.h>

#include <cmath>

#include "iris/grad_check.hpp"
#include "iris/heads.hpp"

using namespace iris;

namespace {

SegmentBlock make_block(i64 rows, i64 valid, i64 dim, ActionType action, Rng& rng) {
  SegmentBlock b;
  b.data = Matrix(rows, dim);
  b.valid = valid;
  b.action = action;
  for (i64 t = 0; t < valid; ++t)
    for (i64 c = 0; c < dim; ++c) b.data.at(t, c) = rng.normal();
  return b;
}

EmbeddingSequence make_emb(i64 t_len, i64 dim, Rng& rng) {
  EmbeddingSequence e;
  e.windows = Matrix(t_len, dim);
  e.valid_count = t_len;
  for (double& v : e.windows.v) v = rng.normal();
  return e;
}

SegmentHead::Config goe_config(i64 dim) {
  SegmentHead::Config cfg;
  cfg.in_dim = dim;
  cfg.channels = 6;
  cfg.hidden = 6;
  return cfg;
}

}  // namespace

TEST_CASE("goe head: output always within [-5, 5], clamp is exact") {
  Rng rng(51);
  SegmentHead head(goe_config(4), rng);
  // blow up the weights so raw outputs overshoot the range
  std::vector<nn::ParamTensor*> params;
  head.collect_params(params);
  for (auto* p : params)
    for (double& w : p->w) w *= 50.0;

  for (int trial = 0; trial < 100; ++trial) {
    const auto block = make_block(8, 8, 4, static_cast<ActionType>(rng.uniform_int(1, 3)), rng);
    const double y = head.forward(block);
    CHECK(y >= -5.0);
    CHECK(y <= 5.0);
  }
}

TEST_CASE("goe head: condition input is live") {
  Rng rng(52);
  SegmentHead head(goe_config(4), rng);
  Rng block_rng(99);
  SegmentBlock block = make_block(8, 8, 4, ActionType::Jump, block_rng);
  const double as_jump = head.forward(block);
  block.action = ActionType::Spin;
  const double as_spin = head.forward(block);
  block.action = ActionType::StepSequence;
  const double as_step = head.forward(block);
  CHECK(as_jump != as_spin);
  CHECK(as_spin != as_step);
}

TEST_CASE("goe head: zero weights give 0, Transition rejected, purity") {
  Rng rng(53);
  SegmentHead head(goe_config(4), rng);
  std::vector<nn::ParamTensor*> params;
  head.collect_params(params);
  for (auto* p : params) std::fill(p->w.begin(), p->w.end(), 0.0);
  const auto block = make_block(6, 6, 4, ActionType::Jump, rng);
  CHECK(head.forward(block) == 0.0);

  SegmentBlock trans = block;
  trans.action = ActionType::Transition;
  CHECK_THROWS_AS(head.forward(trans), Error);

  SegmentHead pure(goe_config(4), rng);
  const double a = pure.forward(block);
  const double b = pure.forward(block);
  CHECK(a == b);
}

TEST_CASE("goe head: invariant to values in the zero-padded tail") {
  Rng rng(54);
  SegmentHead head(goe_config(4), rng);
  SegmentBlock block = make_block(10, 6, 4, ActionType::Spin, rng);
  const double clean = head.forward(block);
  // scribble over the padding tail; the head must never read it
  for (i64 t = 6; t < 10; ++t)
    for (i64 c = 0; c < 4; ++c) block.data.at(t, c) = 1e9;
  CHECK(head.forward(block) == clean);
}

TEST_CASE("pcs head: five outputs in [0, 10], padding-invariant pooling") {
  Rng rng(55);
  PcsHead::Config cfg;
  cfg.in_dim = 4;
  cfg.channels = 6;
  cfg.hidden = 6;
  PcsHead head(cfg, rng);

  const auto emb = make_emb(12, 4, rng);
  const auto scores = head.forward(emb);
  for (double s : scores) {
    CHECK(s >= 0.0);
    CHECK(s <= 10.0);
  }

  // appending zero-padding windows leaves the outputs unchanged
  const auto padded = emb.padded_to(20);
  CHECK(head.forward(padded) == scores);

  // deterministic
  CHECK(head.forward(emb) == scores);
}

TEST_CASE("pcs head: multi-task trunk is shared") {
  Rng rng(56);
  PcsHead::Config cfg;
  cfg.in_dim = 4;
  cfg.channels = 6;
  cfg.hidden = 6;
  PcsHead head(cfg, rng);
  std::vector<nn::ParamTensor*> params;
  head.collect_params(params);

  const auto emb = make_emb(10, 4, rng);
  for (auto* p : params) p->zero_grad();
  head.forward(emb);
  // a gradient step on a single component's loss reaches the shared trunk
  std::array<double, kNumPcsComponents> g{};
  g[2] = 1.0;
  head.backward(g);
  double conv_grad = 0.0;
  for (double x : params[0]->g) conv_grad += std::fabs(x);  // first conv weight
  CHECK(conv_grad > 0.0);
}

TEST_CASE("pcs head: gradient check on T=10, D=8") {
  Rng rng(57);
  PcsHead::Config cfg;
  cfg.in_dim = 8;
  cfg.channels = 5;
  cfg.hidden = 5;
  PcsHead head(cfg, rng);
  const auto emb = make_emb(10, 8, rng);
  std::array<double, kNumPcsComponents> target{};
  for (auto& t : target) t = rng.uniform(0.0, 10.0);

  std::vector<nn::ParamTensor*> params;
  head.collect_params(params);
  const auto loss = [&] {
    const auto y = head.forward(emb);
    double s = 0.0;
    for (size_t c = 0; c < kNumPcsComponents; ++c) s += (y[c] - target[c]) * (y[c] - target[c]);
    return s / kNumPcsComponents;
  };
  const auto grads = [&] {
    for (auto* p : params) p->zero_grad();
    const auto y = head.forward(emb);
    std::array<double, kNumPcsComponents> g{};
    for (size_t c = 0; c < kNumPcsComponents; ++c)
      g[c] = 2.0 * (y[c] - target[c]) / kNumPcsComponents;
    head.backward(g);
  };
  CHECK(nn::grad_check(loss, grads, params) < 1e-4);
}

TEST_CASE("goe head: gradient check through conv trunk, pooling and condition") {
  Rng rng(58);
  SegmentHead head(goe_config(5), rng);
  const auto block = make_block(9, 7, 5, ActionType::StepSequence, rng);
  const double target = 2.5;

  std::vector<nn::ParamTensor*> params;
  head.collect_params(params);
  const auto loss = [&] {
    const double y = head.forward(block);
    return (y - target) * (y - target);
  };
  const auto grads = [&] {
    for (auto* p : params) p->zero_grad();
    const double y = head.forward(block);
    head.backward(2.0 * (y - target));
  };
  CHECK(nn::grad_check(loss, grads, params) < 1e-4);
}

TEST_CASE("pooled regressor: masked pooling and clamp") {
  Rng rng(59);
  PooledRegressor::Config cfg;
  cfg.in_dim = 4;
  cfg.hidden = 6;
  cfg.outputs = 3;
  cfg.clamp = true;
  cfg.lo = -5.0;
  cfg.hi = 5.0;
  PooledRegressor reg(cfg, rng);

  const auto emb = make_emb(8, 4, rng);
  const auto y = reg.forward(emb);
  REQUIRE(y.size() == 3);
  for (double v : y) {
    CHECK(v >= -5.0);
    CHECK(v <= 5.0);
  }
  CHECK(reg.forward(emb.padded_to(12)) == y);
}

TEST_CASE("training_targets: pass-through and missing truth") {
  SyntheticConfig cfg;
  cfg.n_records = 1;
  cfg.dim = 8;
  cfg.t_min = 60;
  cfg.t_max = 120;
  auto records = generate_synthetic(cfg, 3);
  const auto targets = training_targets(records[0]);
  CHECK(targets.goe == records[0].sheet.truth->goe);
  CHECK(targets.pcs == records[0].sheet.truth->pcs);

  PerformanceRecord no_truth = records[0];
  no_truth.sheet.truth.reset();
  CHECK_THROWS_AS(training_targets(no_truth), Error);
}
