#pragma once

#include <array>
#include <vector>

#include "iris/data.hpp"
#include "iris/layers.hpp"
#include "iris/losses.hpp"

namespace iris {

struct MsTcnConfig {
  i64 in_dim = 0;
  i64 channels = 32;
  i64 stages = 2;
  i64 layers = 6;  // dilations 1, 2, 4, ..., 2^(layers-1)
  i64 classes = kNumActions;
};

// Dilated conv -> ReLU -> 1x1 conv, added back onto the input.
class DilatedResidualBlock {
 public:
  DilatedResidualBlock(const std::string& name, i64 channels, i64 dilation, Rng& rng);
  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& gy);
  void collect_params(std::vector<nn::ParamTensor*>& out);

 private:
  nn::Conv1d dilated_;
  nn::Relu relu_;
  nn::Conv1d proj_;
};

class MsTcnStage {
 public:
  MsTcnStage(const std::string& name, i64 in_dim, const MsTcnConfig& cfg, Rng& rng);
  Matrix forward(const Matrix& x);  // returns T x classes logits
  Matrix backward(const Matrix& glogits);
  void collect_params(std::vector<nn::ParamTensor*>& out);

 private:
  nn::Conv1d in_proj_;
  std::vector<DilatedResidualBlock> blocks_;
  nn::Conv1d out_proj_;
};

// Multi-stage temporal convolutional segmentation network. Stage s > 1
// consumes the softmax of stage s-1's logits.
class MsTcn {
 public:
  MsTcn(const MsTcnConfig& cfg, Rng& rng);

  // One T x classes logit tensor per stage.
  std::vector<Matrix> forward(const Matrix& x);
  // Accumulates parameter gradients given dL/dlogits per stage.
  void backward(const std::vector<Matrix>& grad_logits);
  std::vector<nn::ParamTensor*> params();
  const MsTcnConfig& config() const { return cfg_; }

 private:
  MsTcnConfig cfg_;
  std::vector<MsTcnStage> stages_;
  std::vector<Matrix> inter_probs_;  // softmax outputs feeding stages 2..S
};

// Runs the network over the valid prefix of the sequence; logits rows beyond
// the valid region are zero (uniform class probabilities) and excluded from
// every loss.
std::vector<Matrix> mstcn_forward(const EmbeddingSequence& embeddings, MsTcn& net);

struct SegLossParts {
  double cross_entropy = 0.0;  // summed over stages
  double smoothing = 0.0;      // summed over stages, unweighted
  double total = 0.0;          // ce + lambda * smoothing
};

// Sum over stages of cross-entropy plus lambda times the truncated
// smoothing penalty. grad_logits, when given, receives dTotal/dlogits per
// stage.
SegLossParts segmentation_loss(const std::vector<Matrix>& stage_logits,
                               const std::vector<int>& labels, const nn::Mask& mask,
                               double lambda_smooth, double epsilon,
                               std::vector<Matrix>* grad_logits = nullptr);

// Per-window argmax over the valid region; ties break to the lowest class
// index (Transition < Jump < Spin < StepSequence).
SegmentLabeling decode_labels(const Matrix& logits, i64 valid_count);

struct CorrectionResult {
  SegmentLabeling labels;
  // per action type, how many planned runs could not be found
  std::array<i64, kNumActions> deficit{};
  bool any_deficit() const {
    for (i64 d : deficit)
      if (d > 0) return true;
    return false;
  }
};

// Keeps the n_a longest runs of each non-Transition type (ties break to the
// earlier start) and relabels every other non-Transition window as
// Transition. Fewer available runs than n_a keeps them all and flags the
// deficit.
CorrectionResult correct_segments(const SegmentLabeling& labels,
                                  const std::array<i64, kNumActions>& counts);

// Overlap of one-hot encoded labelings: 2(a.b) / (|a|^2 + |b|^2).
double dice(const SegmentLabeling& pred, const SegmentLabeling& truth);

// Per-class intersection over union, averaged over classes present in
// either labeling.
double iou(const SegmentLabeling& pred, const SegmentLabeling& truth);

std::vector<int> labels_as_ints(const SegmentLabeling& labels);

}  // namespace iris
