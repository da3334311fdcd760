#include "iris/losses.hpp"

#include <cmath>

#include "iris/kernels.hpp"

namespace iris::nn {

namespace {

void check_labels(const Matrix& m, const std::vector<int>& labels, const Mask& mask) {
  require(static_cast<i64>(labels.size()) == m.rows, ErrorKind::Dimension,
          "label count does not match window count");
  require(static_cast<i64>(mask.size()) == m.rows, ErrorKind::Dimension,
          "mask length does not match window count");
  for (int l : labels)
    require(l >= 0 && l < m.cols, ErrorKind::Validation,
            "label " + std::to_string(l) + " out of range [0," + std::to_string(m.cols) + ")");
}

}  // namespace

double cross_entropy(const Matrix& probs, const std::vector<int>& labels,
                     const Mask& mask, bool* empty_mask) {
  check_labels(probs, labels, mask);
  double sum = 0.0;
  i64 n = 0;
  for (i64 t = 0; t < probs.rows; ++t) {
    if (!mask[static_cast<size_t>(t)]) continue;
    sum += -std::log(probs.at(t, labels[static_cast<size_t>(t)]));
    ++n;
  }
  if (n == 0) {
    diag::warn("cross_entropy: all windows masked out, loss defined as 0");
    if (empty_mask) *empty_mask = true;
    return 0.0;
  }
  if (empty_mask) *empty_mask = false;
  return sum / static_cast<double>(n);
}

double softmax_xent_with_grad(const Matrix& logits, const std::vector<int>& labels,
                              const Mask& mask, Matrix* grad) {
  check_labels(logits, labels, mask);
  i64 n = 0;
  for (i64 t = 0; t < logits.rows; ++t)
    if (mask[static_cast<size_t>(t)]) ++n;
  *grad = Matrix(logits.rows, logits.cols);
  if (n == 0) {
    diag::warn("cross_entropy: all windows masked out, loss defined as 0");
    return 0.0;
  }
  const Matrix lp = log_softmax_rows(logits);
  const double inv = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (i64 t = 0; t < logits.rows; ++t) {
    if (!mask[static_cast<size_t>(t)]) continue;
    const int label = labels[static_cast<size_t>(t)];
    loss += -lp.at(t, label);
    double* gr = grad->row(t);
    const double* lr = lp.row(t);
    for (i64 c = 0; c < logits.cols; ++c) gr[c] = std::exp(lr[c]) * inv;
    gr[label] -= inv;
  }
  return loss * inv;
}

double smoothing_loss(const Matrix& logits, double epsilon) {
  return smoothing_loss_with_grad(logits, epsilon, nullptr);
}

double smoothing_loss_with_grad(const Matrix& logits, double epsilon, Matrix* grad) {
  const i64 t_len = logits.rows;
  const i64 k = logits.cols;
  if (grad) *grad = Matrix(t_len, k);
  if (t_len < 2) return 0.0;

  const Matrix lp = log_softmax_rows(logits);
  const double norm = 1.0 / (static_cast<double>(t_len - 1) * static_cast<double>(k));
  double loss = 0.0;
  Matrix glp(t_len, k);  // dL/d log p; clamped terms contribute nothing
  for (i64 t = 1; t < t_len; ++t) {
    const double* cur = lp.row(t);
    const double* prev = lp.row(t - 1);
    for (i64 c = 0; c < k; ++c) {
      const double d = cur[c] - prev[c];
      const double sq = d * d;
      if (sq < epsilon) {
        loss += sq;
        if (grad) {
          glp.at(t, c) += 2.0 * d * norm;
          glp.at(t - 1, c) -= 2.0 * d * norm;
        }
      } else {
        loss += epsilon;
      }
    }
  }
  if (grad) *grad = log_softmax_backward(lp, glp);
  return loss * norm;
}

double mse(std::span<const double> pred, std::span<const double> target) {
  require(pred.size() == target.size() && !pred.empty(), ErrorKind::Dimension,
          "mse: length mismatch or empty input");
  double sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

}  // namespace iris::nn
