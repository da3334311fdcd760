#include "iris/heads.hpp"

#include <algorithm>
#include <cmath>

namespace iris {

namespace {

constexpr i64 kConditionDims = 3;  // one-hot Jump / Spin / StepSequence

}  // namespace

SegmentHead::SegmentHead(const Config& cfg, Rng& rng)
    : cfg_(cfg),
      conv1_("seg_head.conv1", cfg.in_dim, cfg.channels, 3, 1, rng),
      conv2_("seg_head.conv2", cfg.channels, cfg.channels, 3, 1, rng),
      dense1_("seg_head.dense1", cfg.channels + kConditionDims, cfg.hidden, rng),
      dense2_("seg_head.dense2", cfg.hidden, 1, rng) {
  require(cfg.in_dim > 0, ErrorKind::Validation, "segment head: in_dim not set");
}

double SegmentHead::forward(const SegmentBlock& block) {
  require(block.action != ActionType::Transition, ErrorKind::Validation,
          "segment head: Transition is not a scorable condition");
  require(block.data.cols == cfg_.in_dim, ErrorKind::Dimension,
          "segment head: block dimension mismatch");
  require(block.valid > 0 && block.valid <= block.data.rows, ErrorKind::Dimension,
          "segment head: bad block valid count");
  pooled_rows_ = block.valid;

  // conv over the valid prefix only, so padded tail values never leak
  const Matrix x = block.data.top_rows(block.valid);
  const Matrix h = relu2_.forward(conv2_.forward(relu1_.forward(conv1_.forward(x))));
  const std::vector<double> pooled = nn::mean_rows(h, block.valid);

  Matrix feat(1, cfg_.channels + kConditionDims);
  std::copy(pooled.begin(), pooled.end(), feat.v.begin());
  feat.at(0, cfg_.channels + static_cast<i64>(block.action) - 1) = 1.0;

  const Matrix z = relu3_.forward(dense1_.forward(feat));
  const double out = dense2_.forward(z).at(0, 0);
  if (!cfg_.clamp) {
    clamp_passthrough_ = true;
    return out;
  }
  clamp_passthrough_ = out >= cfg_.lo && out <= cfg_.hi;
  return std::min(cfg_.hi, std::max(cfg_.lo, out));
}

void SegmentHead::backward(double g) {
  if (!clamp_passthrough_) return;
  Matrix gout(1, 1);
  gout.at(0, 0) = g;
  const Matrix gfeat = dense1_.backward(relu3_.backward(dense2_.backward(gout)));
  std::vector<double> gpooled(static_cast<size_t>(cfg_.channels));
  for (i64 c = 0; c < cfg_.channels; ++c) gpooled[static_cast<size_t>(c)] = gfeat.at(0, c);
  const Matrix gh = nn::mean_rows_backward(gpooled, pooled_rows_, pooled_rows_);
  conv1_.backward(relu1_.backward(conv2_.backward(relu2_.backward(gh))));
}

void SegmentHead::collect_params(std::vector<nn::ParamTensor*>& out) {
  out.push_back(&conv1_.weight);
  out.push_back(&conv1_.bias);
  out.push_back(&conv2_.weight);
  out.push_back(&conv2_.bias);
  out.push_back(&dense1_.weight);
  out.push_back(&dense1_.bias);
  out.push_back(&dense2_.weight);
  out.push_back(&dense2_.bias);
}

PcsHead::PcsHead(const Config& cfg, Rng& rng)
    : cfg_(cfg),
      conv1_("pcs_head.conv1", cfg.in_dim, cfg.channels, 3, 1, rng),
      conv2_("pcs_head.conv2", cfg.channels, cfg.channels, 3, 1, rng),
      dense1_("pcs_head.dense1", cfg.channels, cfg.hidden, rng),
      dense2_("pcs_head.dense2", cfg.hidden, kNumPcsComponents, rng) {
  require(cfg.in_dim > 0, ErrorKind::Validation, "pcs head: in_dim not set");
  // start at the midpoint of the component scale so the hard clamp cannot
  // zero the gradient before training begins
  std::fill(dense2_.bias.w.begin(), dense2_.bias.w.end(), 5.0);
}

std::array<double, kNumPcsComponents> PcsHead::forward(const EmbeddingSequence& embeddings) {
  require(embeddings.dim() == cfg_.in_dim, ErrorKind::Dimension,
          "pcs head: embedding dimension mismatch");
  valid_ = embeddings.valid_count;

  const Matrix x = embeddings.valid_view();
  const Matrix h = relu2_.forward(conv2_.forward(relu1_.forward(conv1_.forward(x))));
  const std::vector<double> pooled = nn::mean_rows(h, valid_);
  Matrix feat(1, cfg_.channels);
  std::copy(pooled.begin(), pooled.end(), feat.v.begin());
  const Matrix out = dense2_.forward(relu3_.forward(dense1_.forward(feat)));

  std::array<double, kNumPcsComponents> scores{};
  for (size_t c = 0; c < kNumPcsComponents; ++c) {
    const double raw = out.at(0, static_cast<i64>(c));
    passthrough_[c] = raw >= 0.0 && raw <= 10.0;
    scores[c] = std::min(10.0, std::max(0.0, raw));
  }
  return scores;
}

void PcsHead::backward(const std::array<double, kNumPcsComponents>& g) {
  Matrix gout(1, kNumPcsComponents);
  for (size_t c = 0; c < kNumPcsComponents; ++c)
    gout.at(0, static_cast<i64>(c)) = passthrough_[c] ? g[c] : 0.0;
  const Matrix gfeat = dense1_.backward(relu3_.backward(dense2_.backward(gout)));
  std::vector<double> gpooled(gfeat.v.begin(), gfeat.v.end());
  const Matrix gh = nn::mean_rows_backward(gpooled, valid_, valid_);
  conv1_.backward(relu1_.backward(conv2_.backward(relu2_.backward(gh))));
}

void PcsHead::collect_params(std::vector<nn::ParamTensor*>& out) {
  out.push_back(&conv1_.weight);
  out.push_back(&conv1_.bias);
  out.push_back(&conv2_.weight);
  out.push_back(&conv2_.bias);
  out.push_back(&dense1_.weight);
  out.push_back(&dense1_.bias);
  out.push_back(&dense2_.weight);
  out.push_back(&dense2_.bias);
}

PooledRegressor::PooledRegressor(const Config& cfg, Rng& rng)
    : cfg_(cfg),
      dense1_("reg.dense1", cfg.in_dim, cfg.hidden, rng),
      dense2_("reg.dense2", cfg.hidden, cfg.outputs, rng) {
  require(cfg.in_dim > 0 && cfg.outputs > 0, ErrorKind::Validation, "regressor: bad config");
  if (cfg.clamp)
    std::fill(dense2_.bias.w.begin(), dense2_.bias.w.end(), 0.5 * (cfg.lo + cfg.hi));
}

std::vector<double> PooledRegressor::forward(const EmbeddingSequence& embeddings) {
  require(embeddings.dim() == cfg_.in_dim, ErrorKind::Dimension,
          "regressor: embedding dimension mismatch");
  valid_ = embeddings.valid_count;
  const std::vector<double> pooled = nn::mean_rows(embeddings.windows, valid_);
  Matrix feat(1, cfg_.in_dim);
  std::copy(pooled.begin(), pooled.end(), feat.v.begin());
  const Matrix out = dense2_.forward(relu_.forward(dense1_.forward(feat)));

  std::vector<double> result(static_cast<size_t>(cfg_.outputs));
  passthrough_.assign(static_cast<size_t>(cfg_.outputs), true);
  for (i64 o = 0; o < cfg_.outputs; ++o) {
    double x = out.at(0, o);
    if (cfg_.clamp) {
      passthrough_[static_cast<size_t>(o)] = x >= cfg_.lo && x <= cfg_.hi;
      x = std::min(cfg_.hi, std::max(cfg_.lo, x));
    }
    result[static_cast<size_t>(o)] = x;
  }
  return result;
}

void PooledRegressor::backward(const std::vector<double>& g) {
  require(static_cast<i64>(g.size()) == cfg_.outputs, ErrorKind::Dimension,
          "regressor backward: gradient size mismatch");
  Matrix gout(1, cfg_.outputs);
  for (i64 o = 0; o < cfg_.outputs; ++o)
    gout.at(0, o) = passthrough_[static_cast<size_t>(o)] ? g[static_cast<size_t>(o)] : 0.0;
  dense1_.backward(relu_.backward(dense2_.backward(gout)));
}

void PooledRegressor::collect_params(std::vector<nn::ParamTensor*>& out) {
  out.push_back(&dense1_.weight);
  out.push_back(&dense1_.bias);
  out.push_back(&dense2_.weight);
  out.push_back(&dense2_.bias);
}

TrainingTargets training_targets(const PerformanceRecord& record) {
  require(record.sheet.truth.has_value(), ErrorKind::Validation,
          "record " + record.sheet.performance_id + " carries no ground truth");
  TrainingTargets t;
  t.goe = record.sheet.truth->goe;
  t.pcs = record.sheet.truth->pcs;
  return t;
}

}  // namespace iris
