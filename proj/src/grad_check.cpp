#include "iris/grad_check.hpp"

#include <cmath>

namespace iris::nn {

double grad_check(const std::function<double()>& loss,
                  const std::function<void()>& compute_grads,
                  std::span<ParamTensor* const> params, double h) {
  compute_grads();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const ParamTensor* p : params) analytic.push_back(p->g);

  double worst = 0.0;
  for (size_t i = 0; i < params.size(); ++i) {
    ParamTensor& p = *params[i];
    for (size_t j = 0; j < p.w.size(); ++j) {
      const double saved = p.w[j];
      p.w[j] = saved + h;
      const double up = loss();
      p.w[j] = saved - h;
      const double down = loss();
      p.w[j] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double a = analytic[i][j];
      const double denom = std::max({1.0, std::fabs(a), std::fabs(fd)});
      worst = std::max(worst, std::fabs(a - fd) / denom);
    }
  }
  return worst;
}

}  // namespace iris::nn
