#include "iris/segmentation.hpp"

#include <algorithm>
#include <cmath>

namespace iris {

DilatedResidualBlock::DilatedResidualBlock(const std::string& name, i64 channels, i64 dilation,
                                           Rng& rng)
    : dilated_(name + ".dilated", channels, channels, 3, dilation, rng),
      proj_(name + ".proj", channels, channels, 1, 1, rng) {}

Matrix DilatedResidualBlock::forward(const Matrix& x) {
  Matrix h = proj_.forward(relu_.forward(dilated_.forward(x)));
  for (i64 i = 0; i < h.size(); ++i) h.v[static_cast<size_t>(i)] += x.v[static_cast<size_t>(i)];
  return h;
}

Matrix DilatedResidualBlock::backward(const Matrix& gy) {
  Matrix gx = dilated_.backward(relu_.backward(proj_.backward(gy)));
  for (i64 i = 0; i < gx.size(); ++i) gx.v[static_cast<size_t>(i)] += gy.v[static_cast<size_t>(i)];
  return gx;
}

void DilatedResidualBlock::collect_params(std::vector<nn::ParamTensor*>& out) {
  out.push_back(&dilated_.weight);
  out.push_back(&dilated_.bias);
  out.push_back(&proj_.weight);
  out.push_back(&proj_.bias);
}

MsTcnStage::MsTcnStage(const std::string& name, i64 in_dim, const MsTcnConfig& cfg, Rng& rng)
    : in_proj_(name + ".in", in_dim, cfg.channels, 1, 1, rng),
      out_proj_(name + ".out", cfg.channels, cfg.classes, 1, 1, rng) {
  blocks_.reserve(static_cast<size_t>(cfg.layers));
  i64 dilation = 1;
  for (i64 l = 0; l < cfg.layers; ++l) {
    blocks_.emplace_back(name + ".block" + std::to_string(l), cfg.channels, dilation, rng);
    dilation *= 2;
  }
}

Matrix MsTcnStage::forward(const Matrix& x) {
  Matrix h = in_proj_.forward(x);
  for (auto& b : blocks_) h = b.forward(h);
  return out_proj_.forward(h);
}

Matrix MsTcnStage::backward(const Matrix& glogits) {
  Matrix g = out_proj_.backward(glogits);
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) g = it->backward(g);
  return in_proj_.backward(g);
}

void MsTcnStage::collect_params(std::vector<nn::ParamTensor*>& out) {
  out.push_back(&in_proj_.weight);
  out.push_back(&in_proj_.bias);
  for (auto& b : blocks_) b.collect_params(out);
  out.push_back(&out_proj_.weight);
  out.push_back(&out_proj_.bias);
}

MsTcn::MsTcn(const MsTcnConfig& cfg, Rng& rng) : cfg_(cfg) {
  require(cfg.in_dim > 0 && cfg.channels > 0 && cfg.stages > 0 && cfg.layers > 0,
          ErrorKind::Validation, "bad MS-TCN configuration");
  for (i64 s = 0; s < cfg.stages; ++s) {
    const i64 in_dim = (s == 0) ? cfg.in_dim : cfg.classes;
    stages_.emplace_back("mstcn.s" + std::to_string(s), in_dim, cfg, rng);
  }
}

std::vector<Matrix> MsTcn::forward(const Matrix& x) {
  require(x.cols == cfg_.in_dim, ErrorKind::Dimension,
          "mstcn: input dimension " + std::to_string(x.cols) + ", expected " +
              std::to_string(cfg_.in_dim));
  std::vector<Matrix> logits;
  inter_probs_.clear();
  Matrix cur = x;
  for (size_t s = 0; s < stages_.size(); ++s) {
    logits.push_back(stages_[s].forward(cur));
    if (s + 1 < stages_.size()) {
      inter_probs_.push_back(nn::softmax_rows(logits.back()));
      cur = inter_probs_.back();
    }
  }
  return logits;
}

void MsTcn::backward(const std::vector<Matrix>& grad_logits) {
  require(grad_logits.size() == stages_.size(), ErrorKind::Dimension,
          "mstcn backward: gradient count mismatch");
  Matrix carried;  // dL/d(input of stage s+1)
  for (i64 s = static_cast<i64>(stages_.size()) - 1; s >= 0; --s) {
    Matrix g = grad_logits[static_cast<size_t>(s)];
    if (s + 1 < static_cast<i64>(stages_.size())) {
      // chain through the softmax feeding the next stage
      const Matrix gsm = nn::softmax_backward(inter_probs_[static_cast<size_t>(s)], carried);
      for (i64 i = 0; i < g.size(); ++i)
        g.v[static_cast<size_t>(i)] += gsm.v[static_cast<size_t>(i)];
    }
    carried = stages_[static_cast<size_t>(s)].backward(g);
  }
}

std::vector<nn::ParamTensor*> MsTcn::params() {
  std::vector<nn::ParamTensor*> out;
  for (auto& s : stages_) s.collect_params(out);
  return out;
}

std::vector<Matrix> mstcn_forward(const EmbeddingSequence& embeddings, MsTcn& net) {
  embeddings.validate();
  std::vector<Matrix> logits = net.forward(embeddings.valid_view());
  if (embeddings.windows.rows == embeddings.valid_count) return logits;
  // keep the T x K shape contract for padded inputs
  std::vector<Matrix> padded;
  padded.reserve(logits.size());
  for (const Matrix& l : logits) {
    Matrix p(embeddings.windows.rows, l.cols);
    std::copy(l.v.begin(), l.v.end(), p.v.begin());
    padded.push_back(std::move(p));
  }
  return padded;
}

SegLossParts segmentation_loss(const std::vector<Matrix>& stage_logits,
                               const std::vector<int>& labels, const nn::Mask& mask,
                               double lambda_smooth, double epsilon,
                               std::vector<Matrix>* grad_logits) {
  require(!stage_logits.empty(), ErrorKind::Dimension, "segmentation_loss: no stages");
  SegLossParts parts;
  if (grad_logits) grad_logits->clear();
  for (const Matrix& logits : stage_logits) {
    Matrix gce, gsm;
    const double ce = grad_logits
                          ? nn::softmax_xent_with_grad(logits, labels, mask, &gce)
                          : nn::cross_entropy(nn::softmax_rows(logits), labels, mask);
    const double sm = grad_logits ? nn::smoothing_loss_with_grad(logits, epsilon, &gsm)
                                  : nn::smoothing_loss(logits, epsilon);
    parts.cross_entropy += ce;
    parts.smoothing += sm;
    if (grad_logits) {
      Matrix g(logits.rows, logits.cols);
      for (i64 i = 0; i < g.size(); ++i)
        g.v[static_cast<size_t>(i)] =
            gce.v[static_cast<size_t>(i)] + lambda_smooth * gsm.v[static_cast<size_t>(i)];
      grad_logits->push_back(std::move(g));
    }
  }
  parts.total = parts.cross_entropy + lambda_smooth * parts.smoothing;
  return parts;
}

SegmentLabeling decode_labels(const Matrix& logits, i64 valid_count) {
  require(valid_count > 0 && valid_count <= logits.rows, ErrorKind::Dimension,
          "decode_labels: bad valid count");
  SegmentLabeling out;
  out.labels.reserve(static_cast<size_t>(valid_count));
  for (i64 t = 0; t < valid_count; ++t) {
    const double* row = logits.row(t);
    int best = 0;
    for (i64 c = 1; c < logits.cols; ++c)
      if (row[c] > row[best]) best = static_cast<int>(c);
    out.labels.push_back(static_cast<ActionType>(best));
  }
  return out;
}

CorrectionResult correct_segments(const SegmentLabeling& labels,
                                  const std::array<i64, kNumActions>& counts) {
  CorrectionResult result;
  result.labels = labels;
  const std::vector<Segment> runs = labels.segments();

  for (int a = 1; a < kNumActions; ++a) {
    std::vector<Segment> of_type;
    for (const Segment& r : runs)
      if (static_cast<int>(r.action) == a) of_type.push_back(r);
    const i64 want = counts[static_cast<size_t>(a)];
    if (static_cast<i64>(of_type.size()) < want)
      result.deficit[static_cast<size_t>(a)] = want - static_cast<i64>(of_type.size());
    // longest first, earlier start breaks ties
    std::sort(of_type.begin(), of_type.end(), [](const Segment& x, const Segment& y) {
      const i64 lx = x.end - x.start, ly = y.end - y.start;
      if (lx != ly) return lx > ly;
      return x.start < y.start;
    });
    for (size_t i = static_cast<size_t>(std::min<i64>(want, static_cast<i64>(of_type.size())));
         i < of_type.size(); ++i) {
      for (i64 t = of_type[i].start; t < of_type[i].end; ++t)
        result.labels.labels[static_cast<size_t>(t)] = ActionType::Transition;
    }
  }
  for (int a = 1; a < kNumActions; ++a) {
    if (result.deficit[static_cast<size_t>(a)] > 0)
      diag::warn("segment correction: found " +
                 std::to_string(counts[static_cast<size_t>(a)] - result.deficit[static_cast<size_t>(a)]) +
                 " run(s) of " + std::string(action_name(static_cast<ActionType>(a))) +
                 " but the sheet plans " + std::to_string(counts[static_cast<size_t>(a)]));
  }
  return result;
}

namespace {

void check_same_length(const SegmentLabeling& a, const SegmentLabeling& b) {
  require(a.length() == b.length() && a.length() > 0, ErrorKind::Dimension,
          "labelings must have equal non-zero lengths");
}

}  // namespace

double dice(const SegmentLabeling& pred, const SegmentLabeling& truth) {
  check_same_length(pred, truth);
  // one-hot over 4 classes, flattened: dot counts agreements, each squared
  // norm equals the window count
  i64 agree = 0;
  for (size_t t = 0; t < pred.labels.size(); ++t)
    if (pred.labels[t] == truth.labels[t]) ++agree;
  const double n = static_cast<double>(pred.length());
  return 2.0 * static_cast<double>(agree) / (n + n);
}

double iou(const SegmentLabeling& pred, const SegmentLabeling& truth) {
  check_same_length(pred, truth);
  double sum = 0.0;
  int classes = 0;
  for (int a = 0; a < kNumActions; ++a) {
    i64 inter = 0, uni = 0;
    for (size_t t = 0; t < pred.labels.size(); ++t) {
      const bool p = static_cast<int>(pred.labels[t]) == a;
      const bool q = static_cast<int>(truth.labels[t]) == a;
      inter += (p && q) ? 1 : 0;
      uni += (p || q) ? 1 : 0;
    }
    if (uni == 0) continue;  // class absent from both labelings
    sum += static_cast<double>(inter) / static_cast<double>(uni);
    ++classes;
  }
  return classes == 0 ? 0.0 : sum / static_cast<double>(classes);
}

std::vector<int> labels_as_ints(const SegmentLabeling& labels) {
  std::vector<int> out;
  out.reserve(labels.labels.size());
  for (ActionType a : labels.labels) out.push_back(static_cast<int>(a));
  return out;
}

}  // namespace iris
