#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "iris/kernels.hpp"
#include "iris/rng.hpp"
#include "iris/tensor.hpp"

namespace iris::nn {

// One learnable tensor: values plus an accumulated gradient of the same
// shape. Shapes are fixed at construction.
struct ParamTensor {
  std::string name;
  std::vector<i64> shape;
  std::vector<double> w;
  std::vector<double> g;

  ParamTensor() = default;
  ParamTensor(std::string n, std::vector<i64> s) : name(std::move(n)), shape(std::move(s)) {
    i64 total = 1;
    for (i64 d : shape) {
      require(d > 0, ErrorKind::Dimension, "parameter dimension must be positive");
      total *= d;
    }
    w.assign(static_cast<size_t>(total), 0.0);
    g.assign(static_cast<size_t>(total), 0.0);
  }

  i64 size() const { return static_cast<i64>(w.size()); }
  void zero_grad() { std::fill(g.begin(), g.end(), 0.0); }
};

// Uniform in [-sqrt(1/fan_in), +sqrt(1/fan_in)]
inline void init_uniform_fan_in(ParamTensor& p, i64 fan_in, Rng& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  for (double& x : p.w) x = rng.uniform(-bound, bound);
}

// Same-padding dilated 1D convolution layer. forward() caches its input so
// that backward() can accumulate parameter gradients.
class Conv1d {
 public:
  Conv1d(std::string name, i64 in_ch, i64 out_ch, i64 kernel, i64 dilation, Rng& rng)
      : weight(name + ".w", {out_ch, kernel, in_ch}),
        bias(name + ".b", {out_ch}),
        in_ch_(in_ch),
        out_ch_(out_ch),
        kernel_(kernel),
        dilation_(dilation) {
    require(kernel % 2 == 1, ErrorKind::Dimension, "conv1d kernel width must be odd");
    require(dilation >= 1, ErrorKind::Dimension, "conv1d dilation must be positive");
    init_uniform_fan_in(weight, kernel * in_ch, rng);
  }

  Matrix forward(const Matrix& x) {
    require(x.cols == in_ch_, ErrorKind::Dimension,
            "conv1d: input has " + std::to_string(x.cols) + " channels, expected " +
                std::to_string(in_ch_));
    x_ = x;
    Matrix y(x.rows, out_ch_);
    conv1d_forward(x.v.data(), x.rows, in_ch_, weight.w.data(), bias.w.data(), out_ch_,
                   kernel_, dilation_, y.v.data());
    return y;
  }

  Matrix backward(const Matrix& gy) {
    require(gy.rows == x_.rows && gy.cols == out_ch_, ErrorKind::Dimension,
            "conv1d backward shape mismatch");
    conv1d_backward_params(gy.v.data(), x_.v.data(), x_.rows, in_ch_, out_ch_, kernel_,
                           dilation_, weight.g.data(), bias.g.data());
    Matrix gx(x_.rows, in_ch_);
    conv1d_backward_input(gy.v.data(), x_.rows, out_ch_, weight.w.data(), in_ch_, kernel_,
                          dilation_, gx.v.data());
    return gx;
  }

  i64 in_channels() const { return in_ch_; }
  i64 out_channels() const { return out_ch_; }

  ParamTensor weight;
  ParamTensor bias;

 private:
  i64 in_ch_, out_ch_, kernel_, dilation_;
  Matrix x_;
};

// Affine map y = x W^T + b with weights stored [out][in].
class Dense {
 public:
  Dense(std::string name, i64 in, i64 out, Rng& rng)
      : weight(name + ".w", {out, in}), bias(name + ".b", {out}), in_(in), out_(out) {
    init_uniform_fan_in(weight, in, rng);
  }

  Matrix forward(const Matrix& x) {
    require(x.cols == in_, ErrorKind::Dimension,
            "dense: input has " + std::to_string(x.cols) + " columns, expected " +
                std::to_string(in_));
    x_ = x;
    Matrix y(x.rows, out_);
    dense_forward(x.v.data(), x.rows, in_, weight.w.data(), bias.w.data(), out_, y.v.data());
    return y;
  }

  Matrix backward(const Matrix& gy) {
    require(gy.rows == x_.rows && gy.cols == out_, ErrorKind::Dimension,
            "dense backward shape mismatch");
    dense_backward_params(gy.v.data(), x_.v.data(), x_.rows, in_, out_, weight.g.data(),
                          bias.g.data());
    Matrix gx(x_.rows, in_);
    dense_backward_input(gy.v.data(), x_.rows, out_, weight.w.data(), in_, gx.v.data());
    return gx;
  }

  ParamTensor weight;
  ParamTensor bias;

 private:
  i64 in_, out_;
  Matrix x_;
};

class Relu {
 public:
  Matrix forward(const Matrix& x) {
    x_ = x;
    Matrix y(x.rows, x.cols);
    relu_forward(x.v.data(), x.size(), y.v.data());
    return y;
  }
  Matrix backward(const Matrix& gy) {
    Matrix gx(x_.rows, x_.cols);
    relu_backward(gy.v.data(), x_.v.data(), x_.size(), gx.v.data());
    return gx;
  }

 private:
  Matrix x_;
};

}  // namespace iris::nn
