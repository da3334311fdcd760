#include "iris/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace iris::metrics {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorKind::Dimension, "correlation: length mismatch");
  require(a.size() >= 3, ErrorKind::Validation,
          "correlation requires at least 3 samples, got " + std::to_string(a.size()));
  for (double x : a)
    require(std::isfinite(x), ErrorKind::Validation, "correlation: non-finite value");
  for (double x : b)
    require(std::isfinite(x), ErrorKind::Validation, "correlation: non-finite value");
}

double clamp_unit(double r) { return std::min(1.0, std::max(-1.0, r)); }

}  // namespace

std::vector<double> rank_average(std::span<const double> values) {
  require(!values.empty(), ErrorKind::Validation, "rank_average: empty input");
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t i, size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) share the mean of ranks i+1..j+1
    const double mean_rank = static_cast<double>(i + j) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  require(saa > 0.0, ErrorKind::Validation, "pearson: first side is constant");
  require(sbb > 0.0, ErrorKind::Validation, "pearson: second side is constant");
  return clamp_unit(sab / std::sqrt(saa * sbb));
}

double spearman(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b);
  const auto is_constant = [](std::span<const double> s) {
    return std::all_of(s.begin(), s.end(), [&](double x) { return x == s[0]; });
  };
  require(!is_constant(a), ErrorKind::Validation, "spearman: first side is constant");
  require(!is_constant(b), ErrorKind::Validation, "spearman: second side is constant");
  const std::vector<double> ra = rank_average(a);
  const std::vector<double> rb = rank_average(b);
  return pearson(ra, rb);
}

}  // namespace iris::metrics
