#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mdpgt/error.hpp"
#include "mdpgt/topology.hpp"

using namespace mdpgt;

namespace {

// Circulant eigenvalues of the Metropolis ring (all degrees 2, weights 1/3):
// (1 + 2 cos(2 pi k / N)) / 3. lambda is the largest magnitude over k != 0.
double ring_lambda_oracle(std::size_t n) {
  double best = 0.0;
  for (std::size_t k = 1; k < n; ++k)
    best = std::max(best, std::abs((1.0 + 2.0 * std::cos(2.0 * std::numbers::pi * k / n)) / 3.0));
  return best;
}

Graph random_connected(std::size_t n, std::mt19937_64& rng) {
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) edges.emplace_back(std::uniform_int_distribution<std::size_t>(0, i - 1)(rng), i);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t e = 0; e < n / 2; ++e) edges.emplace_back(pick(rng), pick(rng));
  return build_graph(n, edges);
}

}  // namespace

TEST_CASE("graph families") {
  CHECK(build_graph(TopologyKind::full, 3).edges() == std::vector<Edge>{{0, 1}, {0, 2}, {1, 2}});
  CHECK(build_graph(TopologyKind::ring, 4).edges() == std::vector<Edge>{{0, 1}, {0, 3}, {1, 2}, {2, 3}});
  CHECK(build_graph(TopologyKind::ring, 2).edges() == std::vector<Edge>{{0, 1}});
  CHECK(build_graph(TopologyKind::ring, 1).edges().empty());

  const Graph b = build_graph(TopologyKind::bipartite, 5);
  CHECK(b.edges().size() == 6);
  CHECK(b.adjacent(0, 3));
  CHECK_FALSE(b.adjacent(0, 1));
  CHECK_FALSE(b.adjacent(3, 4));
}

TEST_CASE("graph construction errors") {
  CHECK_THROWS_AS(build_graph(TopologyKind::full, 0), ConfigError);
  CHECK_THROWS_AS(build_graph(TopologyKind::bipartite, 1), ConfigError);
  CHECK_THROWS_AS(build_graph(4, {{0, 1}, {2, 3}}), ConfigError);
  CHECK_THROWS_AS(build_graph(3, {{0, 1}, {1, 3}}), ConfigError);
  CHECK_NOTHROW(build_graph(3, {{0, 1}, {1, 2}, {2, 2}, {1, 0}}));
  CHECK(build_graph(3, {{1, 0}, {2, 1}, {0, 1}}).edges().size() == 2);
}

TEST_CASE("metropolis weights") {
  SUBCASE("two agents") {
    const auto w = metropolis_weights(build_graph(TopologyKind::full, 2));
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) CHECK(w(i, j) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(w.lambda() == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("ring of four") {
    const auto w = metropolis_weights(build_graph(TopologyKind::ring, 4));
    const double third = 1.0 / 3.0;
    const double row0[] = {third, third, 0.0, third};
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) CHECK(w(i, j) == doctest::Approx(row0[(j + 4 - i) % 4]).epsilon(1e-15));
    CHECK(w.lambda() == doctest::Approx(third).epsilon(1e-12));
  }
  SUBCASE("single agent") {
    const auto w = metropolis_weights(build_graph(TopologyKind::full, 1));
    CHECK(w(0, 0) == 1.0);
    CHECK(w.lambda() == 0.0);
  }
}

TEST_CASE("spectral gap matches the circulant oracle on rings") {
  for (std::size_t n = 3; n <= 16; ++n) {
    CAPTURE(n);
    CHECK(spectral_gap(metropolis_weights(build_graph(TopologyKind::ring, n))) ==
          doctest::Approx(ring_lambda_oracle(n)).epsilon(1e-9));
  }
}

TEST_CASE("mixing matrix rejects non-doubly-stochastic weights") {
  CHECK_THROWS_AS(MixingMatrix(2, {0.6, 0.4, 0.6, 0.4}), ConfigError);
  CHECK_THROWS_AS(MixingMatrix(2, {1.5, -0.5, -0.5, 1.5}), ConfigError);
  CHECK_THROWS_AS(MixingMatrix(2, {1.0, 0.0, 0.0}), ConfigError);
  CHECK_NOTHROW(MixingMatrix(2, {0.25, 0.75, 0.75, 0.25}));
}

TEST_CASE("metropolis invariants over generated connected graphs up to 64 agents") {
  std::mt19937_64 rng(11);
  for (std::size_t n = 1; n <= 64; ++n) {
    std::vector<Graph> graphs{build_graph(TopologyKind::full, n), build_graph(TopologyKind::ring, n),
                              random_connected(n, rng)};
    if (n >= 2) graphs.push_back(build_graph(TopologyKind::bipartite, n));
    for (const auto& g : graphs) {
      const auto w = metropolis_weights(g);
      for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0, col = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          row += w(i, j);
          col += w(j, i);
          REQUIRE(w(i, j) >= 0.0);
          REQUIRE(w(i, j) == w(j, i));
          if (w(i, j) > 0.0) REQUIRE(g.adjacent(i, j));
        }
        REQUIRE(std::abs(row - 1.0) <= 1e-12);
        REQUIRE(std::abs(col - 1.0) <= 1e-12);
      }
      REQUIRE(w.lambda() < 1.0);
    }
  }
}

TEST_CASE("gossip contracts toward the average") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (auto kind : {TopologyKind::ring, TopologyKind::bipartite, TopologyKind::full}) {
    const auto w = metropolis_weights(build_graph(kind, 7));
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Vec> xs(7, Vec(3));
      for (auto& x : xs)
        for (double& v : x) v = normal(rng);
      const double before = std::sqrt(consensus_error(xs));
      const double after = std::sqrt(consensus_error(gossip(w, xs)));
      CHECK(after <= w.lambda() * before * (1.0 + 1e-10) + 1e-12);
    }
  }
}

TEST_CASE("consensus error of identical iterates is exactly zero") {
  const std::vector<Vec> xs(3, Vec{0.1, -0.7, 1e-3});
  CHECK(consensus_error(xs) == 0.0);
  CHECK(consensus_error({{0.0}, {2.0}}) == doctest::Approx(2.0));
}
