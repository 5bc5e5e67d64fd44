#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mdpgt/vec.hpp"

namespace mdpgt {

enum class TopologyKind { full, ring, bipartite, custom };

using Edge = std::pair<std::size_t, std::size_t>;

/// Static undirected connected communication graph. Self-loops are implicit
/// and never stored; edges are normalized to (lo, hi) and sorted.
class Graph {
 public:
  /// Throws ConfigError for out-of-range indices or a disconnected graph.
  Graph(std::size_t n_agents, std::vector<Edge> edges);

  std::size_t size() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t degree(std::size_t i) const { return adjacency_.at(i).size(); }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_.at(i); }
  bool adjacent(std::size_t i, std::size_t j) const;

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

Graph build_graph(TopologyKind kind, std::size_t n);
Graph build_graph(std::size_t n, std::vector<Edge> edges);

TopologyKind parse_topology_kind(const std::string& name);
std::string to_string(TopologyKind kind);

/// Dense doubly stochastic N x N weights together with
/// lambda = ||W - (1/N) 11^T||_2.
class MixingMatrix {
 public:
  /// Validates nonnegativity and unit row/column sums (1e-12), then computes
  /// lambda. Throws ConfigError on violation.
  MixingMatrix(std::size_t n, Vec row_major_weights);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }
  const Vec& weights() const noexcept { return w_; }
  double lambda() const noexcept { return lambda_; }

 private:
  std::size_t n_;
  Vec w_;
  double lambda_;
};

MixingMatrix metropolis_weights(const Graph& g);

/// Largest singular value of W - P by power iteration on (W-P)^T (W-P);
/// stops when the normalized iterate moves less than 1e-10, capped at
/// 10,000 iterations.
double spectral_gap(std::size_t n, const Vec& row_major_weights);
inline double spectral_gap(const MixingMatrix& w) { return spectral_gap(w.size(), w.weights()); }

/// out_i = sum_j w_ij x_j, summed in ascending j.
std::vector<Vec> gossip(const MixingMatrix& w, const std::vector<Vec>& xs);

/// sum_i ||x_i - mean(x)||^2, i.e. ||x - Lambda x||^2 for the stacked block.
double consensus_error(const std::vector<Vec>& xs);

}  // namespace mdpgt
