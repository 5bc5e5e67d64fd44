#include "mdpgt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace mdpgt::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of an empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("variance needs at least two observations");
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double standard_error(std::span<const double> xs) {
  return std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

double tail_mean(std::span<const double> xs, std::size_t window) {
  const std::size_t w = std::min(window, xs.size());
  return mean(xs.subspan(xs.size() - w));
}

Vec smooth(std::span<const double> xs, std::size_t window) {
  Vec out(xs.size());
  double run = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    run += xs[i];
    if (i >= window) run -= xs[i - window];
    out[i] = run / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("curves differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

TestResult paired_t_test(std::span<const double> a, std::span<const double> b, bool one_sided) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("paired test needs two equal samples");
  Vec d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double se = standard_error(d);
  const double m = mean(d);
  if (se == 0.0) {
    const double t = m == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), m);
    const double p = m == 0.0 ? 1.0 : (one_sided ? (m > 0.0 ? 0.0 : 1.0) : 0.0);
    return {t, p};
  }
  const double t = m / se;
  boost::math::students_t dist(static_cast<double>(d.size() - 1));
  const double upper = boost::math::cdf(boost::math::complement(dist, t));
  const double p = one_sided ? upper : 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return {t, p};
}

TestResult f_test_greater(std::span<const double> numerator, std::span<const double> denominator) {
  const double f = variance(numerator) / variance(denominator);
  boost::math::fisher_f dist(static_cast<double>(numerator.size() - 1),
                             static_cast<double>(denominator.size() - 1));
  return {f, boost::math::cdf(boost::math::complement(dist, f))};
}

}  // namespace mdpgt::stats
