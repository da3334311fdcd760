#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "iris/grad_check.hpp"
#include "iris/segmentation.hpp"

#include "oracles.hpp"

using namespace iris;

namespace {

SegmentLabeling labels_from(const char* s) {
  SegmentLabeling lab;
  for (const char* p = s; *p; ++p) {
    switch (*p) {
      case 'T': lab.labels.push_back(ActionType::Transition); break;
      case 'J': lab.labels.push_back(ActionType::Jump); break;
      case 'S': lab.labels.push_back(ActionType::Spin); break;
      case 'Q': lab.labels.push_back(ActionType::StepSequence); break;
      default: FAIL("bad label char");
    }
  }
  return lab;
}

Matrix random_matrix(i64 r, i64 c, Rng& rng) {
  Matrix m(r, c);
  for (double& x : m.v) x = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("mstcn: shape contract and uniform zero-weight output") {
  Rng rng(31);
  MsTcnConfig cfg;
  cfg.in_dim = 6;
  cfg.channels = 8;
  cfg.stages = 2;
  cfg.layers = 3;
  MsTcn net(cfg, rng);

  EmbeddingSequence emb;
  emb.windows = random_matrix(20, 6, rng);
  emb.valid_count = 20;
  const auto logits = mstcn_forward(emb, net);
  REQUIRE(logits.size() == 2);
  for (const Matrix& l : logits) {
    CHECK(l.rows == 20);
    CHECK(l.cols == 4);
    CHECK(l.all_finite());
  }

  // padded input keeps the T x K shape; soft padding rows are zero
  const EmbeddingSequence padded = emb.padded_to(25);
  const auto padded_logits = mstcn_forward(padded, net);
  CHECK(padded_logits[0].rows == 25);
  for (i64 c = 0; c < 4; ++c) CHECK(padded_logits[1].at(22, c) == 0.0);
  // valid-region logits are unchanged by padding
  for (i64 t = 0; t < 20; ++t)
    for (i64 c = 0; c < 4; ++c) CHECK(padded_logits[1].at(t, c) == logits[1].at(t, c));

  // zero weights give all-equal logits, hence uniform probabilities
  MsTcn zero_net(cfg, rng);
  for (auto* p : zero_net.params()) std::fill(p->w.begin(), p->w.end(), 0.0);
  const auto zl = zero_net.forward(emb.valid_view());
  const Matrix probs = nn::softmax_rows(zl.back());
  for (i64 t = 0; t < probs.rows; ++t)
    for (i64 c = 0; c < 4; ++c) CHECK(probs.at(t, c) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("mstcn: dimension mismatch") {
  Rng rng(32);
  MsTcnConfig cfg;
  cfg.in_dim = 6;
  MsTcn net(cfg, rng);
  CHECK_THROWS_AS(net.forward(random_matrix(10, 5, rng)), Error);
}

TEST_CASE("smoothing loss: zero for constant logits, clamp bounds") {
  Matrix constant(6, 4);
  for (i64 t = 0; t < 6; ++t)
    for (i64 c = 0; c < 4; ++c) constant.at(t, c) = 0.7 * static_cast<double>(c);
  CHECK(nn::smoothing_loss(constant, 4.0) == 0.0);

  Rng rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix logits = random_matrix(rng.uniform_int(2, 12), 4, rng);
    const double eps = rng.uniform(0.5, 8.0);
    const double loss = nn::smoothing_loss(logits, eps);
    CHECK(loss >= 0.0);
    CHECK(loss <= eps);
  }
}

TEST_CASE("smoothing loss: clamped step contributes exactly epsilon") {
  // all four classes flip by +-L with L^2 = 2*eps, so every term clamps
  const double eps = 4.0;
  const double L = std::sqrt(2.0 * eps);
  Matrix logits(2, 4);
  logits.at(0, 0) = L;
  logits.at(0, 2) = L;
  logits.at(1, 1) = L;
  logits.at(1, 3) = L;
  // per class |delta log p| = L, squared 2*eps >= eps, clamp active
  CHECK(nn::smoothing_loss(logits, eps) == doctest::Approx(eps).epsilon(1e-12));
}

TEST_CASE("smoothing loss: invariant to a per-window constant logit shift") {
  Rng rng(34);
  const Matrix logits = random_matrix(8, 4, rng);
  Matrix shifted = logits;
  for (i64 t = 0; t < 8; ++t) {
    const double shift = rng.normal();
    for (i64 c = 0; c < 4; ++c) shifted.at(t, c) += shift;
  }
  CHECK(nn::smoothing_loss(shifted, 4.0) ==
        doctest::Approx(nn::smoothing_loss(logits, 4.0)).epsilon(1e-9));
}

TEST_CASE("segmentation loss: uniform logits give S * ln 4, lambda 0 reduces to CE") {
  const i64 t_len = 10;
  std::vector<Matrix> logits = {Matrix(t_len, 4), Matrix(t_len, 4)};
  std::vector<int> labels(t_len, 2);
  nn::Mask mask(t_len, 1);
  const auto parts = segmentation_loss(logits, labels, mask, 0.15, 4.0);
  CHECK(parts.smoothing == 0.0);
  CHECK(parts.total == doctest::Approx(2.0 * std::log(4.0)).epsilon(1e-12));

  Rng rng(35);
  std::vector<Matrix> rnd = {random_matrix(t_len, 4, rng), random_matrix(t_len, 4, rng)};
  const auto no_smooth = segmentation_loss(rnd, labels, mask, 0.0, 4.0);
  const double ce = nn::cross_entropy(nn::softmax_rows(rnd[0]), labels, mask) +
                    nn::cross_entropy(nn::softmax_rows(rnd[1]), labels, mask);
  CHECK(no_smooth.total == doctest::Approx(ce).epsilon(1e-12));
}

TEST_CASE("segmentation loss: confident run-constant predictions are near zero") {
  // two runs over T=8: boundary steps clamp, everything else is constant
  const i64 t_len = 8;
  const double margin = 50.0;
  Matrix logits(t_len, 4);
  std::vector<int> labels;
  for (i64 t = 0; t < t_len; ++t) {
    const int cls = t < 4 ? 0 : 1;
    labels.push_back(cls);
    logits.at(t, cls) = margin;
  }
  nn::Mask mask(t_len, 1);
  const double lambda = 0.15, eps = 4.0;
  const auto parts = segmentation_loss({logits}, labels, mask, lambda, eps);
  const double runs = 2.0;
  const double bound = lambda * eps * (runs - 1.0) * 4.0 / static_cast<double>(t_len);
  CHECK(parts.total <= bound + 1e-6);
}

TEST_CASE("decode: one-hot, tie rule, argmax oracle") {
  Matrix onehot(4, 4);
  onehot.at(0, 1) = 1.0;
  onehot.at(1, 1) = 1.0;
  onehot.at(2, 0) = 1.0;
  onehot.at(3, 3) = 1.0;
  const SegmentLabeling lab = decode_labels(onehot, 4);
  CHECK(lab == labels_from("JJTQ"));

  // exact tie between Jump and Spin goes to Jump
  Matrix tie(1, 4);
  tie.at(0, 1) = 3.0;
  tie.at(0, 2) = 3.0;
  CHECK(decode_labels(tie, 1).labels[0] == ActionType::Jump);

  Rng rng(36);
  const Matrix logits = random_matrix(30, 4, rng);
  const SegmentLabeling decoded = decode_labels(logits, 30);
  for (i64 t = 0; t < 30; ++t) {
    i64 best = 0;
    for (i64 c = 0; c < 4; ++c)
      if (logits.at(t, c) > logits.at(t, best)) best = c;
    CHECK(static_cast<i64>(decoded.labels[static_cast<size_t>(t)]) == best);
  }
}

TEST_CASE("correct_segments: spec examples") {
  std::array<i64, kNumActions> counts{};
  counts[static_cast<size_t>(ActionType::Jump)] = 1;
  counts[static_cast<size_t>(ActionType::Spin)] = 1;
  counts[static_cast<size_t>(ActionType::StepSequence)] = 0;

  SUBCASE("longest runs kept, count-0 type erased") {
    std::array<i64, kNumActions> c = counts;
    c[static_cast<size_t>(ActionType::Spin)] = 0;
    diag::set_sink([](const std::string&) {});
    const auto result = correct_segments(labels_from("JJTJTSS"), c);
    diag::set_sink({});
    CHECK(result.labels == labels_from("JJTTTTT"));
    CHECK(!result.any_deficit());
  }

  SUBCASE("already satisfying counts is a fixed point") {
    const SegmentLabeling lab = labels_from("TJJTSST");
    const auto result = correct_segments(lab, counts);
    CHECK(result.labels == lab);
    CHECK(!result.any_deficit());
  }

  SUBCASE("equal-length runs keep the earlier one") {
    const auto result = correct_segments(labels_from("JJTJJ"), counts);
    CHECK(result.labels == labels_from("JJTTT"));
  }

  SUBCASE("deficit keeps everything and flags") {
    std::array<i64, kNumActions> want{};
    want[static_cast<size_t>(ActionType::Jump)] = 2;
    diag::set_sink([](const std::string&) {});
    const auto result = correct_segments(labels_from("TJJT"), want);
    diag::set_sink({});
    CHECK(result.labels == labels_from("TJJT"));
    CHECK(result.any_deficit());
    CHECK(result.deficit[static_cast<size_t>(ActionType::Jump)] == 1);
  }
}

TEST_CASE("correct_segments: brute-force oracle on random cases, idempotence") {
  Rng rng(37);
  diag::set_sink([](const std::string&) {});
  for (int trial = 0; trial < 400; ++trial) {
    SegmentLabeling lab;
    const i64 len = rng.uniform_int(1, 12);
    for (i64 t = 0; t < len; ++t)
      lab.labels.push_back(static_cast<ActionType>(rng.uniform_int(0, 3)));
    std::array<i64, kNumActions> counts{};
    for (int a = 1; a < kNumActions; ++a) counts[static_cast<size_t>(a)] = rng.uniform_int(0, 3);

    const auto result = correct_segments(lab, counts);
    CHECK(result.labels == oracles::correct(lab, counts));

    // idempotent
    const auto again = correct_segments(result.labels, counts);
    CHECK(again.labels == result.labels);

    // run counts match exactly when enough runs existed
    for (int a = 1; a < kNumActions; ++a) {
      i64 runs = 0;
      for (const auto& s : result.labels.segments())
        if (static_cast<int>(s.action) == a) ++runs;
      if (result.deficit[static_cast<size_t>(a)] == 0)
        CHECK(runs == counts[static_cast<size_t>(a)]);
    }

    // never increases the number of non-Transition windows
    i64 before = 0, after = 0;
    for (auto a : lab.labels) before += a != ActionType::Transition;
    for (auto a : result.labels.labels) after += a != ActionType::Transition;
    CHECK(after <= before);
  }
  diag::set_sink({});
}

TEST_CASE("dice: identity, disjoint, hand-evaluated") {
  const auto a = labels_from("JJTT");
  CHECK(dice(a, a) == 1.0);
  CHECK(dice(labels_from("JJJJ"), labels_from("SSSS")) == 0.0);
  CHECK(dice(labels_from("JJTT"), labels_from("JTTT")) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK_THROWS_AS(dice(labels_from("JJ"), labels_from("J")), Error);
}

TEST_CASE("iou: identity, hand-evaluated, absent-class exclusion") {
  const auto a = labels_from("JJTT");
  CHECK(iou(a, a) == 1.0);
  // J: 1/2, T: 2/3 -> 7/12
  CHECK(iou(labels_from("JJTT"), labels_from("JTTT")) ==
        doctest::Approx(7.0 / 12.0).epsilon(1e-15));
  // Spin and StepSequence absent from both sides: excluded from the average
  CHECK(iou(labels_from("JT"), labels_from("JT")) == 1.0);
}

TEST_CASE("dice and iou: symmetry, bounds, equality iff identical") {
  Rng rng(38);
  for (int trial = 0; trial < 200; ++trial) {
    const i64 len = rng.uniform_int(1, 20);
    SegmentLabeling a, b;
    for (i64 t = 0; t < len; ++t) {
      a.labels.push_back(static_cast<ActionType>(rng.uniform_int(0, 3)));
      b.labels.push_back(static_cast<ActionType>(rng.uniform_int(0, 3)));
    }
    const double d = dice(a, b);
    const double j = iou(a, b);
    CHECK(d == dice(b, a));
    CHECK(j == iou(b, a));
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    CHECK(j >= 0.0);
    CHECK(j <= 1.0);
    if (a == b) {
      CHECK(d == 1.0);
      CHECK(j == 1.0);
    } else {
      CHECK(d < 1.0);
      CHECK(j < 1.0);
    }
  }
}

TEST_CASE("grad check: two-stage MS-TCN segmentation loss on T=12") {
  Rng rng(39);
  MsTcnConfig cfg;
  cfg.in_dim = 4;
  cfg.channels = 5;
  cfg.stages = 2;
  cfg.layers = 2;
  MsTcn net(cfg, rng);
  const Matrix x = random_matrix(12, 4, rng);
  std::vector<int> labels;
  for (i64 t = 0; t < 12; ++t) labels.push_back(static_cast<int>(rng.uniform_int(0, 3)));
  nn::Mask mask(12, 1);
  const double lambda = 0.15, eps = 4.0;

  const auto params = net.params();
  const auto loss = [&] {
    return segmentation_loss(net.forward(x), labels, mask, lambda, eps).total;
  };
  const auto grads = [&] {
    for (auto* p : params) p->zero_grad();
    const auto logits = net.forward(x);
    std::vector<Matrix> glogits;
    segmentation_loss(logits, labels, mask, lambda, eps, &glogits);
    net.backward(glogits);
  };
  CHECK(nn::grad_check(loss, grads, params) < 1e-4);
}
