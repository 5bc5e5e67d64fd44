#pragma once

#include <cstddef>
#include <span>

#include "mdpgt/vec.hpp"

namespace mdpgt::stats {

double mean(std::span<const double> xs);

/// Unbiased sample variance (n - 1 denominator).
double variance(std::span<const double> xs);

double standard_error(std::span<const double> xs);

/// Mean of the last `window` entries (all entries when shorter).
double tail_mean(std::span<const double> xs, std::size_t window);

/// Trailing moving average: out[i] = mean(xs[max(0, i-window+1) .. i]).
Vec smooth(std::span<const double> xs, std::size_t window);

/// Euclidean distance between equally long curves.
double l2_distance(std::span<const double> a, std::span<const double> b);

struct TestResult {
  double statistic;
  double p_value;
};

/// Paired t-test on a - b. `one_sided` tests H1: mean(a - b) > 0.
TestResult paired_t_test(std::span<const double> a, std::span<const double> b, bool one_sided);

/// One-sided F-test of H1: var(numerator) > var(denominator).
TestResult f_test_greater(std::span<const double> numerator, std::span<const double> denominator);

}  // namespace mdpgt::stats
