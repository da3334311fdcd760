#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "iris/tensor.hpp"

namespace iris::nn {

using Mask = std::vector<std::uint8_t>;

// Mean of -log p(label) over valid windows; padded windows excluded.
// An all-masked input is defined as 0 and emits a diagnostic warning
// (set *empty_mask to observe it programmatically).
double cross_entropy(const Matrix& probs, const std::vector<int>& labels,
                     const Mask& mask, bool* empty_mask = nullptr);

// Fused softmax + cross-entropy: returns the loss and writes dL/dlogits.
double softmax_xent_with_grad(const Matrix& logits, const std::vector<int>& labels,
                              const Mask& mask, Matrix* grad);

// Truncated smoothing penalty on adjacent log-probabilities:
//   mean over steps t>=1 and classes of min((log p_c(t) - log p_c(t-1))^2, epsilon).
// The gradient is the exact derivative of this value, so the clamp stops
// every clamped term's gradient. T < 2 has no adjacent pairs and yields 0.
double smoothing_loss(const Matrix& logits, double epsilon);
double smoothing_loss_with_grad(const Matrix& logits, double epsilon, Matrix* grad);

double mse(std::span<const double> pred, std::span<const double> target);

}  // namespace iris::nn
