#pragma once

#include <span>
#include <vector>

#include "iris/common.hpp"

namespace iris::metrics {

// 1-based ranks; tied values receive the mean of the rank positions they
// occupy.
std::vector<double> rank_average(std::span<const double> values);

// Pearson correlation of average ranks. Requires n >= 3 and at least two
// distinct values on each side; a constant side is signalled with a
// Validation error mentioning "constant".
double spearman(std::span<const double> a, std::span<const double> b);

// Two-pass mean-centred product-moment correlation. Same preconditions.
double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace iris::metrics
