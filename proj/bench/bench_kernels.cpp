// Compares the OpenMP kernels against the serial reference implementations
// and checks that both produce bit-identical results.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "iris/kernels.hpp"
#include "iris/rng.hpp"
#include "iris/segmentation.hpp"

using namespace iris;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

std::vector<double> random_vec(size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

void row(const char* name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-28s %10.3f ms %10.3f ms   %5.2fx   %s\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
  const i64 t_len = 356, cin = 32, cout_ = 32, k = 3, dil = 8;
  const i64 rows = 356, in = 32, out = 32;
  Rng rng(42);

#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled at build time\n");
#endif
  std::printf("%-28s %13s %13s %8s\n", "kernel", "serial", "parallel", "speedup");

  {
    const auto x = random_vec(static_cast<size_t>(t_len * cin), rng);
    const auto w = random_vec(static_cast<size_t>(cout_ * k * cin), rng);
    const auto b = random_vec(static_cast<size_t>(cout_), rng);
    std::vector<double> ys(static_cast<size_t>(t_len * cout_)), yp(ys.size());
    const double ts = time_ms(
        [&] { nn::ref::conv1d_forward(x.data(), t_len, cin, w.data(), b.data(), cout_, k, dil, ys.data()); },
        50);
    const double tp = time_ms(
        [&] { nn::conv1d_forward(x.data(), t_len, cin, w.data(), b.data(), cout_, k, dil, yp.data()); },
        50);
    row("conv1d forward", ts, tp, ys == yp);

    std::vector<double> gxs(x.size()), gxp(x.size());
    const double bs = time_ms(
        [&] { nn::ref::conv1d_backward_input(ys.data(), t_len, cout_, w.data(), cin, k, dil, gxs.data()); },
        50);
    const double bp = time_ms(
        [&] { nn::conv1d_backward_input(ys.data(), t_len, cout_, w.data(), cin, k, dil, gxp.data()); },
        50);
    row("conv1d backward (input)", bs, bp, gxs == gxp);

    std::vector<double> gws(w.size()), gwp(w.size()), gbs(b.size()), gbp(b.size());
    const double ps = time_ms(
        [&] { nn::ref::conv1d_backward_params(ys.data(), x.data(), t_len, cin, cout_, k, dil, gws.data(), gbs.data()); },
        50);
    const double pp = time_ms(
        [&] { nn::conv1d_backward_params(ys.data(), x.data(), t_len, cin, cout_, k, dil, gwp.data(), gbp.data()); },
        50);
    row("conv1d backward (params)", ps, pp, gws == gwp && gbs == gbp);
  }

  {
    const auto x = random_vec(static_cast<size_t>(rows * in), rng);
    const auto w = random_vec(static_cast<size_t>(out * in), rng);
    const auto b = random_vec(static_cast<size_t>(out), rng);
    std::vector<double> ys(static_cast<size_t>(rows * out)), yp(ys.size());
    const double ts = time_ms(
        [&] { nn::ref::dense_forward(x.data(), rows, in, w.data(), b.data(), out, ys.data()); }, 200);
    const double tp = time_ms(
        [&] { nn::dense_forward(x.data(), rows, in, w.data(), b.data(), out, yp.data()); }, 200);
    row("dense forward", ts, tp, ys == yp);
  }

  {
    // whole-network pass: the MS-TCN is where training time goes
    Rng net_rng(7);
    MsTcnConfig cfg;
    cfg.in_dim = 32;
    MsTcn net(cfg, net_rng);
    Matrix x(356, 32);
    for (double& v : x.v) v = rng.normal();
    std::vector<int> labels(356, 1);
    nn::Mask mask(356, 1);
    const double fwd = time_ms([&] { net.forward(x); }, 10);
    const double both = time_ms(
        [&] {
          for (auto* p : net.params()) p->zero_grad();
          auto logits = net.forward(x);
          std::vector<Matrix> glogits;
          segmentation_loss(logits, labels, mask, 0.15, 4.0, &glogits);
          net.backward(glogits);
        },
        10);
    std::printf("%-28s %10.3f ms (forward)  %10.3f ms (forward+backward)\n", "mstcn T=356 D=32",
                fwd, both);
  }
  return 0;
}
