#include "iris/adam.hpp"

#include <cmath>

namespace iris::nn {

AdamState::AdamState(std::span<ParamTensor* const> params, AdamConfig cfg) : cfg_(cfg) {
  require(cfg.lr > 0 && cfg.beta1 >= 0 && cfg.beta1 < 1 && cfg.beta2 >= 0 && cfg.beta2 < 1 &&
              cfg.eps > 0,
          ErrorKind::Validation, "invalid Adam hyperparameters");
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const ParamTensor* p : params) {
    m_.emplace_back(p->w.size(), 0.0);
    v_.emplace_back(p->w.size(), 0.0);
  }
}

void AdamState::step(std::span<ParamTensor* const> params) {
  require(params.size() == m_.size(), ErrorKind::Dimension,
          "adam: parameter list does not match state");
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (size_t i = 0; i < params.size(); ++i) {
    ParamTensor& p = *params[i];
    require(p.w.size() == m_[i].size(), ErrorKind::Dimension,
            "adam: gradient shape does not match accumulator for " + p.name);
    auto& m = m_[i];
    auto& v = v_[i];
    const i64 n = p.size();
#pragma omp parallel for schedule(static)
    for (i64 j = 0; j < n; ++j) {
      const size_t sj = static_cast<size_t>(j);
      const double g = p.g[sj];
      m[sj] = cfg_.beta1 * m[sj] + (1.0 - cfg_.beta1) * g;
      v[sj] = cfg_.beta2 * v[sj] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[sj] / bc1;
      const double vhat = v[sj] / bc2;
      p.w[sj] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace iris::nn
