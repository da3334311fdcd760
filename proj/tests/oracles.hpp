#pragma once

// Independent oracles shared by the unit and acceptance suites. These stay
// deliberately naive: counting instead of sorting, subset enumeration
// instead of greedy selection, single-pass sums instead of two-pass means.

#include <algorithm>
#include <cmath>
#include <vector>

#include "iris/segmentation.hpp"

namespace oracles {

using iris::i64;

inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    size_t less = 0, equal = 0;
    for (size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) ++less;
      if (v[j] == v[i]) ++equal;
    }
    out[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
  }
  return out;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (std::sqrt(n * sxx - sx * sx) * std::sqrt(n * syy - sy * sy));
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

// dice over explicitly materialised one-hot vectors
inline double dice(const iris::SegmentLabeling& a, const iris::SegmentLabeling& b) {
  std::vector<double> va, vb;
  for (auto l : a.labels)
    for (int c = 0; c < iris::kNumActions; ++c) va.push_back(static_cast<int>(l) == c ? 1.0 : 0.0);
  for (auto l : b.labels)
    for (int c = 0; c < iris::kNumActions; ++c) vb.push_back(static_cast<int>(l) == c ? 1.0 : 0.0);
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < va.size(); ++i) {
    dot += va[i] * vb[i];
    na += va[i] * va[i];
    nb += vb[i] * vb[i];
  }
  return 2.0 * dot / (na + nb);
}

inline double iou(const iris::SegmentLabeling& a, const iris::SegmentLabeling& b) {
  double sum = 0;
  int present = 0;
  for (int c = 0; c < iris::kNumActions; ++c) {
    double inter = 0, uni = 0;
    for (size_t t = 0; t < a.labels.size(); ++t) {
      const bool pa = static_cast<int>(a.labels[t]) == c;
      const bool pb = static_cast<int>(b.labels[t]) == c;
      inter += pa && pb;
      uni += pa || pb;
    }
    if (uni == 0) continue;
    sum += inter / uni;
    ++present;
  }
  return present == 0 ? 0.0 : sum / present;
}

// Brute-force over-segmentation correction: per type, enumerate every
// subset of the kept size, maximise total length, break ties by the
// lexicographically smallest start list; relabel the rest as Transition.
inline iris::SegmentLabeling correct(const iris::SegmentLabeling& labels,
                                     const std::array<i64, iris::kNumActions>& counts) {
  iris::SegmentLabeling out = labels;
  const auto runs = labels.segments();
  for (int a = 1; a < iris::kNumActions; ++a) {
    std::vector<iris::Segment> of_type;
    for (const auto& r : runs)
      if (static_cast<int>(r.action) == a) of_type.push_back(r);
    const size_t n = of_type.size();
    const size_t keep = static_cast<size_t>(
        std::min<i64>(counts[static_cast<size_t>(a)], static_cast<i64>(n)));
    std::vector<size_t> best;
    i64 best_len = -1;
    std::vector<i64> best_starts;
    for (size_t bits = 0; bits < (size_t{1} << n); ++bits) {
      if (static_cast<size_t>(__builtin_popcountll(bits)) != keep) continue;
      i64 len = 0;
      std::vector<i64> starts;
      std::vector<size_t> members;
      for (size_t i = 0; i < n; ++i) {
        if (!(bits >> i & 1)) continue;
        len += of_type[i].end - of_type[i].start;
        starts.push_back(of_type[i].start);
        members.push_back(i);
      }
      std::sort(starts.begin(), starts.end());
      if (len > best_len || (len == best_len && starts < best_starts)) {
        best_len = len;
        best_starts = starts;
        best = members;
      }
    }
    std::vector<bool> kept(n, false);
    for (size_t i : best) kept[i] = true;
    for (size_t i = 0; i < n; ++i) {
      if (kept[i]) continue;
      for (i64 t = of_type[i].start; t < of_type[i].end; ++t)
        out.labels[static_cast<size_t>(t)] = iris::ActionType::Transition;
    }
  }
  return out;
}

}  // namespace oracles
