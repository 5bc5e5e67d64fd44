#include "mdpgt/topology.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "mdpgt/error.hpp"
#include "mdpgt/rng.hpp"

namespace mdpgt {

Graph::Graph(std::size_t n_agents, std::vector<Edge> edges) : n_(n_agents), adjacency_(n_agents) {
  if (n_ == 0) throw ConfigError("graph must have at least one agent");
  for (auto& [a, b] : edges) {
    if (a >= n_ || b >= n_)
      throw ConfigError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                        ") references an agent outside [0," + std::to_string(n_) + ")");
    if (a > b) std::swap(a, b);
  }
  std::erase_if(edges, [](const Edge& e) { return e.first == e.second; });
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  for (const auto& [a, b] : edges_) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());

  std::vector<bool> seen(n_, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const std::size_t i = frontier.front();
    frontier.pop();
    for (std::size_t j : adjacency_[i]) {
      if (!seen[j]) {
        seen[j] = true;
        ++reached;
        frontier.push(j);
      }
    }
  }
  if (reached != n_)
    throw ConfigError("graph is disconnected: " + std::to_string(reached) + " of " +
                      std::to_string(n_) + " agents reachable from agent 0");
}

bool Graph::adjacent(std::size_t i, std::size_t j) const {
  if (i == j) return true;
  const auto& nb = adjacency_.at(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

Graph build_graph(TopologyKind kind, std::size_t n) {
  if (n == 0) throw ConfigError("topology needs at least one agent");
  std::vector<Edge> edges;
  switch (kind) {
    case TopologyKind::full:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
      break;
    case TopologyKind::ring:
      for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
      if (n > 2) edges.emplace_back(n - 1, 0);
      break;
    case TopologyKind::bipartite: {
      if (n < 2) throw ConfigError("bipartite topology needs at least two agents");
      const std::size_t left = (n + 1) / 2;
      for (std::size_t i = 0; i < left; ++i)
        for (std::size_t j = left; j < n; ++j) edges.emplace_back(i, j);
      break;
    }
    case TopologyKind::custom:
      throw ConfigError("custom topology requires an explicit edge list");
  }
  return Graph(n, std::move(edges));
}

Graph build_graph(std::size_t n, std::vector<Edge> edges) { return Graph(n, std::move(edges)); }

TopologyKind parse_topology_kind(const std::string& name) {
  if (name == "full") return TopologyKind::full;
  if (name == "ring") return TopologyKind::ring;
  if (name == "bipartite") return TopologyKind::bipartite;
  if (name == "custom") return TopologyKind::custom;
  throw ConfigError("unknown topology '" + name + "' (expected full, ring, bipartite or an edge list)");
}

std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::full: return "full";
    case TopologyKind::ring: return "ring";
    case TopologyKind::bipartite: return "bipartite";
    case TopologyKind::custom: return "custom";
  }
  return "custom";
}

MixingMatrix::MixingMatrix(std::size_t n, Vec row_major_weights) : n_(n), w_(std::move(row_major_weights)) {
  if (n_ == 0 || w_.size() != n_ * n_) throw ConfigError("mixing matrix must be N x N with N >= 1");
  constexpr double tol = 1e-12;
  for (std::size_t i = 0; i < n_; ++i) {
    double row = 0.0;
    double col = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      const double wij = w_[i * n_ + j];
      if (!(wij >= 0.0) || !std::isfinite(wij)) throw ConfigError("mixing weights must be finite and nonnegative");
      row += wij;
      col += w_[j * n_ + i];
    }
    if (std::abs(row - 1.0) > tol || std::abs(col - 1.0) > tol)
      throw ConfigError("mixing matrix is not doubly stochastic at index " + std::to_string(i));
  }
  lambda_ = spectral_gap(n_, w_);
}

MixingMatrix metropolis_weights(const Graph& g) {
  const std::size_t n = g.size();
  Vec w(n * n, 0.0);
  for (const auto& [a, b] : g.edges()) {
    const double wij = 1.0 / (1.0 + static_cast<double>(std::max(g.degree(a), g.degree(b))));
    w[a * n + b] = wij;
    w[b * n + a] = wij;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) off += w[i * n + j];
    w[i * n + i] = 1.0 - off;
  }
  return MixingMatrix(n, std::move(w));
}

double spectral_gap(std::size_t n, const Vec& w) {
  if (n <= 1) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  // A = W - P
  Vec a(w);
  for (double& v : a) v -= inv_n;

  auto apply = [&](const Vec& x, bool transpose) {
    Vec y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) y[i] += (transpose ? a[j * n + i] : a[i * n + j]) * x[j];
    return y;
  };

  // Fixed pseudo-random start so no structured vector is orthogonal to the
  // dominant singular direction by construction.
  Vec x(n);
  std::uint64_t s = 0x5eedULL;
  for (double& v : x) {
    s = splitmix64(s);
    v = static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
  }
  double nx = norm(x);
  for (double& v : x) v /= nx;

  double rayleigh = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Vec y = apply(apply(x, false), true);
    rayleigh = dot(x, y);
    const double ny = norm(y);
    if (ny == 0.0) return 0.0;
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double yi = y[i] / ny;
      delta += (yi - x[i]) * (yi - x[i]);
      x[i] = yi;
    }
    if (std::sqrt(delta) < 1e-10) break;
  }
  // Rayleigh quotient of the converged iterate.
  const Vec ax = apply(x, false);
  rayleigh = squared_norm(ax);
  return std::sqrt(std::max(rayleigh, 0.0));
}

std::vector<Vec> gossip(const MixingMatrix& w, const std::vector<Vec>& xs) {
  const std::size_t n = w.size();
  std::vector<Vec> out(n, Vec(xs.empty() ? 0 : xs.front().size(), 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double wij = w(i, j);
      if (wij != 0.0) axpy(wij, xs[j], out[i]);
    }
  return out;
}

double consensus_error(const std::vector<Vec>& xs) {
  if (xs.empty()) return 0.0;
  // Identical iterates are an exact consensus; the rounded mean need not be.
  if (std::all_of(xs.begin(), xs.end(), [&](const Vec& x) { return x == xs.front(); })) return 0.0;
  const Vec m = mean_of(xs);
  double s = 0.0;
  for (const auto& x : xs)
    for (std::size_t k = 0; k < m.size(); ++k) s += (x[k] - m[k]) * (x[k] - m[k]);
  return s;
}

}  // namespace mdpgt
