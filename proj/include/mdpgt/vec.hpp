#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace mdpgt {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline bool all_finite(std::span<const double> a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

// Arithmetic mean of equally sized vectors, summed in index order.
inline Vec mean_of(const std::vector<Vec>& vs) {
  Vec m(vs.empty() ? 0 : vs.front().size(), 0.0);
  for (const auto& v : vs)
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += v[i];
  const double inv = vs.empty() ? 0.0 : 1.0 / static_cast<double>(vs.size());
  for (double& x : m) x *= inv;
  return m;
}

}  // namespace mdpgt
