#pragma once

#include <functional>
#include <span>

#include "iris/layers.hpp"

namespace iris::nn {

// Verifies analytic gradients against central finite differences.
//
// `loss` evaluates the scalar objective with the current parameter values;
// `compute_grads` must zero and refill every ParamTensor's gradient for the
// same objective. Every parameter entry is perturbed by +-h (double
// precision). The per-entry error is |analytic - fd| / max(1, |analytic|,
// |fd|); the worst one is returned.
double grad_check(const std::function<double()>& loss,
                  const std::function<void()>& compute_grads,
                  std::span<ParamTensor* const> params, double h = 1e-5);

}  // namespace iris::nn
