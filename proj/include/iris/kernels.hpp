#pragma once

#include "iris/common.hpp"
#include "iris/tensor.hpp"

namespace iris::nn {

// OpenMP-parallel numerical kernels. Every output element is written by
// exactly one loop iteration with a fixed inner summation order, so results
// are bit-identical for any thread count (and to the serial reference in
// iris::nn::ref, which shares the summation order).
//
// Convolution weights are laid out [cout][k][cin], dense weights [out][in].
// conv1d uses symmetric zero padding: output length equals input length and
// positions outside [0, T) contribute zero. Kernel width must be odd.

void conv1d_forward(const double* x, i64 t_len, i64 cin, const double* w,
                    const double* b, i64 cout, i64 k, i64 dil, double* y);
void conv1d_backward_input(const double* gy, i64 t_len, i64 cout, const double* w,
                           i64 cin, i64 k, i64 dil, double* gx);
// accumulates into gw / gb
void conv1d_backward_params(const double* gy, const double* x, i64 t_len, i64 cin,
                            i64 cout, i64 k, i64 dil, double* gw, double* gb);

void dense_forward(const double* x, i64 rows, i64 in, const double* w,
                   const double* b, i64 out, double* y);
void dense_backward_input(const double* gy, i64 rows, i64 out, const double* w,
                          i64 in, double* gx);
// accumulates into gw / gb
void dense_backward_params(const double* gy, const double* x, i64 rows, i64 in,
                           i64 out, double* gw, double* gb);

void relu_forward(const double* x, i64 n, double* y);
void relu_backward(const double* gy, const double* x, i64 n, double* gx);

// Row-wise softmax / log-softmax with max subtraction for stability.
Matrix softmax_rows(const Matrix& x);
Matrix log_softmax_rows(const Matrix& x);

// gin[i] = p[i] * (g[i] - sum_j g[j] p[j]) per row, p = softmax output
Matrix softmax_backward(const Matrix& probs, const Matrix& gy);
// gin = g - p * sum(g) per row, p = softmax of the log-softmax input
Matrix log_softmax_backward(const Matrix& log_probs, const Matrix& gy);

// Mean over the first `valid` rows of x; gradient spreads evenly back.
std::vector<double> mean_rows(const Matrix& x, i64 valid);
Matrix mean_rows_backward(const std::vector<double>& g, i64 rows, i64 valid);

namespace ref {

// Serial reference implementations kept for testing and benchmarking the
// parallel kernels above. Same contracts, same summation order.

void conv1d_forward(const double* x, i64 t_len, i64 cin, const double* w,
                    const double* b, i64 cout, i64 k, i64 dil, double* y);
void conv1d_backward_input(const double* gy, i64 t_len, i64 cout, const double* w,
                           i64 cin, i64 k, i64 dil, double* gx);
void conv1d_backward_params(const double* gy, const double* x, i64 t_len, i64 cin,
                            i64 cout, i64 k, i64 dil, double* gw, double* gb);
void dense_forward(const double* x, i64 rows, i64 in, const double* w,
                   const double* b, i64 out, double* y);
void dense_backward_input(const double* gy, i64 rows, i64 out, const double* w,
                          i64 in, double* gx);
void dense_backward_params(const double* gy, const double* x, i64 rows, i64 in,
                           i64 out, double* gw, double* gb);

}  // namespace ref

}  // namespace iris::nn
