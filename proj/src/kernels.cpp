#include "iris/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace iris::nn {

void conv1d_forward(const double* x, i64 t_len, i64 cin, const double* w,
                    const double* b, i64 cout, i64 k, i64 dil, double* y) {
  const i64 c = (k - 1) / 2;
#pragma omp parallel for schedule(static)
  for (i64 t = 0; t < t_len; ++t) {
    double* yrow = y + t * cout;
    for (i64 co = 0; co < cout; ++co) {
      double acc = b[co];
      const double* wco = w + co * k * cin;
      for (i64 j = 0; j < k; ++j) {
        const i64 s = t + dil * (j - c);
        if (s < 0 || s >= t_len) continue;
        const double* xs = x + s * cin;
        const double* wj = wco + j * cin;
        for (i64 ci = 0; ci < cin; ++ci) acc += wj[ci] * xs[ci];
      }
      yrow[co] = acc;
    }
  }
}

void conv1d_backward_input(const double* gy, i64 t_len, i64 cout, const double* w,
                           i64 cin, i64 k, i64 dil, double* gx) {
  const i64 c = (k - 1) / 2;
#pragma omp parallel for schedule(static)
  for (i64 s = 0; s < t_len; ++s) {
    double* gxrow = gx + s * cin;
    std::fill(gxrow, gxrow + cin, 0.0);
    for (i64 j = 0; j < k; ++j) {
      // output position that read input s through tap j
      const i64 t = s - dil * (j - c);
      if (t < 0 || t >= t_len) continue;
      const double* gyrow = gy + t * cout;
      for (i64 co = 0; co < cout; ++co) {
        const double g = gyrow[co];
        const double* wj = w + (co * k + j) * cin;
        for (i64 ci = 0; ci < cin; ++ci) gxrow[ci] += g * wj[ci];
      }
    }
  }
}

void conv1d_backward_params(const double* gy, const double* x, i64 t_len, i64 cin,
                            i64 cout, i64 k, i64 dil, double* gw, double* gb) {
  const i64 c = (k - 1) / 2;
#pragma omp parallel for schedule(static)
  for (i64 co = 0; co < cout; ++co) {
    double acc = 0.0;
    for (i64 t = 0; t < t_len; ++t) acc += gy[t * cout + co];
    gb[co] += acc;
    for (i64 j = 0; j < k; ++j) {
      double* gwj = gw + (co * k + j) * cin;
      for (i64 t = 0; t < t_len; ++t) {
        const i64 s = t + dil * (j - c);
        if (s < 0 || s >= t_len) continue;
        const double g = gy[t * cout + co];
        const double* xs = x + s * cin;
        for (i64 ci = 0; ci < cin; ++ci) gwj[ci] += g * xs[ci];
      }
    }
  }
}

void dense_forward(const double* x, i64 rows, i64 in, const double* w,
                   const double* b, i64 out, double* y) {
#pragma omp parallel for schedule(static)
  for (i64 r = 0; r < rows; ++r) {
    const double* xr = x + r * in;
    double* yr = y + r * out;
    for (i64 o = 0; o < out; ++o) {
      double acc = b[o];
      const double* wo = w + o * in;
      for (i64 i = 0; i < in; ++i) acc += wo[i] * xr[i];
      yr[o] = acc;
    }
  }
}

void dense_backward_input(const double* gy, i64 rows, i64 out, const double* w,
                          i64 in, double* gx) {
#pragma omp parallel for schedule(static)
  for (i64 r = 0; r < rows; ++r) {
    double* gxr = gx + r * in;
    std::fill(gxr, gxr + in, 0.0);
    const double* gyr = gy + r * out;
    for (i64 o = 0; o < out; ++o) {
      const double g = gyr[o];
      const double* wo = w + o * in;
      for (i64 i = 0; i < in; ++i) gxr[i] += g * wo[i];
    }
  }
}

void dense_backward_params(const double* gy, const double* x, i64 rows, i64 in,
                           i64 out, double* gw, double* gb) {
#pragma omp parallel for schedule(static)
  for (i64 o = 0; o < out; ++o) {
    double acc = 0.0;
    for (i64 r = 0; r < rows; ++r) acc += gy[r * out + o];
    gb[o] += acc;
    double* gwo = gw + o * in;
    for (i64 r = 0; r < rows; ++r) {
      const double g = gy[r * out + o];
      const double* xr = x + r * in;
      for (i64 i = 0; i < in; ++i) gwo[i] += g * xr[i];
    }
  }
}

void relu_forward(const double* x, i64 n, double* y) {
#pragma omp parallel for schedule(static)
  for (i64 i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* gy, const double* x, i64 n, double* gx) {
#pragma omp parallel for schedule(static)
  for (i64 i = 0; i < n; ++i) gx[i] = x[i] > 0.0 ? gy[i] : 0.0;
}

Matrix softmax_rows(const Matrix& x) {
  Matrix y(x.rows, x.cols);
#pragma omp parallel for schedule(static)
  for (i64 r = 0; r < x.rows; ++r) {
    const double* xr = x.row(r);
    double* yr = y.row(r);
    double mx = xr[0];
    for (i64 c = 1; c < x.cols; ++c) mx = std::max(mx, xr[c]);
    double z = 0.0;
    for (i64 c = 0; c < x.cols; ++c) {
      yr[c] = std::exp(xr[c] - mx);
      z += yr[c];
    }
    for (i64 c = 0; c < x.cols; ++c) yr[c] /= z;
  }
  return y;
}

Matrix log_softmax_rows(const Matrix& x) {
  Matrix y(x.rows, x.cols);
#pragma omp parallel for schedule(static)
  for (i64 r = 0; r < x.rows; ++r) {
    const double* xr = x.row(r);
    double* yr = y.row(r);
    double mx = xr[0];
    for (i64 c = 1; c < x.cols; ++c) mx = std::max(mx, xr[c]);
    double z = 0.0;
    for (i64 c = 0; c < x.cols; ++c) z += std::exp(xr[c] - mx);
    const double lz = mx + std::log(z);
    for (i64 c = 0; c < x.cols; ++c) yr[c] = xr[c] - lz;
  }
  return y;
}

Matrix softmax_backward(const Matrix& probs, const Matrix& gy) {
  require(probs.rows == gy.rows && probs.cols == gy.cols, ErrorKind::Dimension,
          "softmax_backward shape mismatch");
  Matrix gx(probs.rows, probs.cols);
#pragma omp parallel for schedule(static)
  for (i64 r = 0; r < probs.rows; ++r) {
    const double* pr = probs.row(r);
    const double* gr = gy.row(r);
    double dot = 0.0;
    for (i64 c = 0; c < probs.cols; ++c) dot += gr[c] * pr[c];
    double* gxr = gx.row(r);
    for (i64 c = 0; c < probs.cols; ++c) gxr[c] = pr[c] * (gr[c] - dot);
  }
  return gx;
}

Matrix log_softmax_backward(const Matrix& log_probs, const Matrix& gy) {
  require(log_probs.rows == gy.rows && log_probs.cols == gy.cols, ErrorKind::Dimension,
          "log_softmax_backward shape mismatch");
  Matrix gx(log_probs.rows, log_probs.cols);
#pragma omp parallel for schedule(static)
  for (i64 r = 0; r < log_probs.rows; ++r) {
    const double* lr = log_probs.row(r);
    const double* gr = gy.row(r);
    double gsum = 0.0;
    for (i64 c = 0; c < log_probs.cols; ++c) gsum += gr[c];
    double* gxr = gx.row(r);
    for (i64 c = 0; c < log_probs.cols; ++c) gxr[c] = gr[c] - std::exp(lr[c]) * gsum;
  }
  return gx;
}

std::vector<double> mean_rows(const Matrix& x, i64 valid) {
  require(valid > 0 && valid <= x.rows, ErrorKind::Dimension, "mean_rows: bad valid count");
  std::vector<double> out(static_cast<size_t>(x.cols), 0.0);
  for (i64 r = 0; r < valid; ++r) {
    const double* xr = x.row(r);
    for (i64 c = 0; c < x.cols; ++c) out[static_cast<size_t>(c)] += xr[c];
  }
  for (double& o : out) o /= static_cast<double>(valid);
  return out;
}

Matrix mean_rows_backward(const std::vector<double>& g, i64 rows, i64 valid) {
  Matrix gx(rows, static_cast<i64>(g.size()));
  const double inv = 1.0 / static_cast<double>(valid);
  for (i64 r = 0; r < valid; ++r) {
    double* gxr = gx.row(r);
    for (i64 c = 0; c < gx.cols; ++c) gxr[c] = g[static_cast<size_t>(c)] * inv;
  }
  return gx;
}

namespace ref {

void conv1d_forward(const double* x, i64 t_len, i64 cin, const double* w,
                    const double* b, i64 cout, i64 k, i64 dil, double* y) {
  const i64 c = (k - 1) / 2;
  for (i64 t = 0; t < t_len; ++t) {
    double* yrow = y + t * cout;
    for (i64 co = 0; co < cout; ++co) {
      double acc = b[co];
      const double* wco = w + co * k * cin;
      for (i64 j = 0; j < k; ++j) {
        const i64 s = t + dil * (j - c);
        if (s < 0 || s >= t_len) continue;
        const double* xs = x + s * cin;
        const double* wj = wco + j * cin;
        for (i64 ci = 0; ci < cin; ++ci) acc += wj[ci] * xs[ci];
      }
      yrow[co] = acc;
    }
  }
}

void conv1d_backward_input(const double* gy, i64 t_len, i64 cout, const double* w,
                           i64 cin, i64 k, i64 dil, double* gx) {
  const i64 c = (k - 1) / 2;
  for (i64 s = 0; s < t_len; ++s) {
    double* gxrow = gx + s * cin;
    std::fill(gxrow, gxrow + cin, 0.0);
    for (i64 j = 0; j < k; ++j) {
      const i64 t = s - dil * (j - c);
      if (t < 0 || t >= t_len) continue;
      const double* gyrow = gy + t * cout;
      for (i64 co = 0; co < cout; ++co) {
        const double g = gyrow[co];
        const double* wj = w + (co * k + j) * cin;
        for (i64 ci = 0; ci < cin; ++ci) gxrow[ci] += g * wj[ci];
      }
    }
  }
}

void conv1d_backward_params(const double* gy, const double* x, i64 t_len, i64 cin,
                            i64 cout, i64 k, i64 dil, double* gw, double* gb) {
  const i64 c = (k - 1) / 2;
  for (i64 co = 0; co < cout; ++co) {
    double acc = 0.0;
    for (i64 t = 0; t < t_len; ++t) acc += gy[t * cout + co];
    gb[co] += acc;
    for (i64 j = 0; j < k; ++j) {
      double* gwj = gw + (co * k + j) * cin;
      for (i64 t = 0; t < t_len; ++t) {
        const i64 s = t + dil * (j - c);
        if (s < 0 || s >= t_len) continue;
        const double g = gy[t * cout + co];
        const double* xs = x + s * cin;
        for (i64 ci = 0; ci < cin; ++ci) gwj[ci] += g * xs[ci];
      }
    }
  }
}

void dense_forward(const double* x, i64 rows, i64 in, const double* w,
                   const double* b, i64 out, double* y) {
  for (i64 r = 0; r < rows; ++r) {
    const double* xr = x + r * in;
    double* yr = y + r * out;
    for (i64 o = 0; o < out; ++o) {
      double acc = b[o];
      const double* wo = w + o * in;
      for (i64 i = 0; i < in; ++i) acc += wo[i] * xr[i];
      yr[o] = acc;
    }
  }
}

void dense_backward_input(const double* gy, i64 rows, i64 out, const double* w,
                          i64 in, double* gx) {
  for (i64 r = 0; r < rows; ++r) {
    double* gxr = gx + r * in;
    std::fill(gxr, gxr + in, 0.0);
    const double* gyr = gy + r * out;
    for (i64 o = 0; o < out; ++o) {
      const double g = gyr[o];
      const double* wo = w + o * in;
      for (i64 i = 0; i < in; ++i) gxr[i] += g * wo[i];
    }
  }
}

void dense_backward_params(const double* gy, const double* x, i64 rows, i64 in,
                           i64 out, double* gw, double* gb) {
  for (i64 o = 0; o < out; ++o) {
    double acc = 0.0;
    for (i64 r = 0; r < rows; ++r) acc += gy[r * out + o];
    gb[o] += acc;
    double* gwo = gw + o * in;
    for (i64 r = 0; r < rows; ++r) {
      const double g = gy[r * out + o];
      const double* xr = x + r * in;
      for (i64 i = 0; i < in; ++i) gwo[i] += g * xr[i];
    }
  }
}

}  // namespace ref

}  // namespace iris::nn
