#pragma once

#include <array>

#include "iris/data.hpp"
#include "iris/layers.hpp"

namespace iris {

// Conditional convolutional head scoring one padded segment block: two conv
// layers, average pooling over the block's valid rows, a 3-way one-hot
// action condition concatenated to the pooled features, then two dense
// layers to a scalar. With clamping enabled the output is hard-clamped (the
// GOE configuration, [-5, +5]); the absolute-subscore configuration leaves
// the output linear.
class SegmentHead {
 public:
  struct Config {
    i64 in_dim = 0;
    i64 channels = 32;
    i64 hidden = 32;
    bool clamp = true;
    double lo = kGoeMin;
    double hi = kGoeMax;
  };

  SegmentHead(const Config& cfg, Rng& rng);

  double forward(const SegmentBlock& block);
  // dL/doutput; no gradient flows where the clamp was active
  void backward(double g);
  void collect_params(std::vector<nn::ParamTensor*>& out);
  const Config& config() const { return cfg_; }

 private:
  Config cfg_;
  nn::Conv1d conv1_, conv2_;
  nn::Relu relu1_, relu2_, relu3_;
  nn::Dense dense1_, dense2_;
  i64 pooled_rows_ = 0;
  bool clamp_passthrough_ = true;
};

// Multi-task head over the whole embedding sequence: shared conv trunk and
// pooled dense trunk with 5 clamped outputs on the 0-10 component scale.
// Pooling covers valid windows only, so zero-padding never leaks.
class PcsHead {
 public:
  struct Config {
    i64 in_dim = 0;
    i64 channels = 32;
    i64 hidden = 32;
  };

  PcsHead(const Config& cfg, Rng& rng);

  std::array<double, kNumPcsComponents> forward(const EmbeddingSequence& embeddings);
  void backward(const std::array<double, kNumPcsComponents>& g);
  void collect_params(std::vector<nn::ParamTensor*>& out);

 private:
  Config cfg_;
  nn::Conv1d conv1_, conv2_;
  nn::Relu relu1_, relu2_, relu3_;
  nn::Dense dense1_, dense2_;
  i64 valid_ = 0;
  std::array<bool, kNumPcsComponents> passthrough_{};
};

// Mean-pooled embedding followed by a two-layer regressor; used by the
// ablation variants that predict totals or fixed-size per-element vectors
// without segmentation.
class PooledRegressor {
 public:
  struct Config {
    i64 in_dim = 0;
    i64 hidden = 32;
    i64 outputs = 1;
    bool clamp = false;
    double lo = 0.0;
    double hi = 0.0;
  };

  PooledRegressor(const Config& cfg, Rng& rng);

  std::vector<double> forward(const EmbeddingSequence& embeddings);
  void backward(const std::vector<double>& g);
  void collect_params(std::vector<nn::ParamTensor*>& out);
  const Config& config() const { return cfg_; }

 private:
  Config cfg_;
  nn::Dense dense1_, dense2_;
  nn::Relu relu_;
  i64 valid_ = 0;
  std::vector<bool> passthrough_;
};

struct TrainingTargets {
  std::vector<double> goe;                      // sheet element order
  std::array<double, kNumPcsComponents> pcs{};  // unfactored components
};

// Regression targets from a record's ground truth; errors if the record
// carries none.
TrainingTargets training_targets(const PerformanceRecord& record);

}  // namespace iris
