#pragma once

#include <span>
#include <vector>

#include "iris/layers.hpp"

namespace iris::nn {

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second-moment accumulators mirroring a fixed parameter list. The
// update is the standard bias-corrected Adam step; one state must be
// advanced by a single writer at a time.
class AdamState {
 public:
  AdamState(std::span<ParamTensor* const> params, AdamConfig cfg);

  // Consumes the gradients currently stored in each ParamTensor.
  void step(std::span<ParamTensor* const> params);

  i64 step_count() const { return step_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  i64 step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace iris::nn
