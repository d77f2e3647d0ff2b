#include <doctest.h>

#include <random>
#include <sstream>

#include "deloc/errors.hpp"
#include "deloc/graph.hpp"
#include "oracles.hpp"

using namespace deloc;

namespace {

std::vector<Edge> random_edges(std::size_t d, std::size_t m, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, d - 1);
  std::vector<Edge> e;
  for (std::size_t k = 0; k < m; ++k) e.emplace_back(pick(rng), pick(rng));
  return e;
}

}  // namespace

TEST_CASE("path neighborhoods grow by one on each side") {
  const auto g = InteractionGraph::path(10);
  CHECK(g.degree(0) == 1);
  CHECK(g.degree(5) == 2);
  CHECK(neighborhood_k(g, 5, 2) == std::vector<std::size_t>{3, 4, 5, 6, 7});
  CHECK(neighborhood_k(g, 0, 3) == std::vector<std::size_t>{0, 1, 2, 3});
  const auto s = sparsity_profile(g, 12);
  for (std::size_t k = 1; k <= 12; ++k) CHECK(s.at(k) == std::min<std::size_t>(2 * k + 1, 10));
  CHECK(s.saturated());
}

TEST_CASE("neighborhoods match matrix-power enumeration on random graphs") {
  for (std::uint32_t seed = 1; seed <= 5; ++seed) {
    const std::size_t d = 17;
    const auto edges = random_edges(d, 20, seed);
    const InteractionGraph g(d, edges);
    for (std::size_t k = 1; k <= 5; ++k) {
      const auto expect = oracle::neighborhoods_by_matrix_power(d, edges, k);
      std::size_t s_k = 0;
      for (std::size_t i = 0; i < d; ++i) {
        const auto got = neighborhood_k(g, i, k);
        CHECK(std::set<std::size_t>(got.begin(), got.end()) == expect[i]);
        s_k = std::max(s_k, expect[i].size());
      }
      CHECK(sparsity_profile(g, 5).at(k) == s_k);
    }
    const auto hop = hop_distances(g);
    for (std::size_t k = 1; k <= 4; ++k) {
      const auto nk = oracle::neighborhoods_by_matrix_power(d, edges, k);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) CHECK((hop[i * d + j] <= k) == (nk[i].count(j) == 1));
      }
    }
  }
}

TEST_CASE("lattice and complete graphs") {
  const auto g = InteractionGraph::lattice2d(3, 4);
  CHECK(g.dim() == 12);
  CHECK(g.max_degree() == 4);
  CHECK(g.adjacent(0, 1));
  CHECK(g.adjacent(0, 4));
  CHECK_FALSE(g.adjacent(3, 4));
  CHECK(sparsity_profile(g, 1).at(1) == 5);

  const auto c = InteractionGraph::complete(6);
  CHECK(c.is_complete());
  CHECK(c.degree(3) == 5);
  CHECK(c.edges().size() == 15);
  CHECK(sparsity_profile(c, 3).at(100) == 6);
}

TEST_CASE("edge list parsing skips comments and validates input") {
  std::istringstream in("# header\n0 1\n\n1 2 # trailing comment\n");
  const auto g = InteractionGraph::parse_edge_list(in);
  CHECK(g.dim() == 3);
  CHECK(g.edges() == std::vector<Edge>{{0, 1}, {1, 2}});
  std::istringstream bad("0 x\n");
  CHECK_THROWS_AS(InteractionGraph::parse_edge_list(bad), InputError);
  std::istringstream out_of_range("0 5\n");
  CHECK_THROWS_AS(InteractionGraph::parse_edge_list(out_of_range, 3), InputError);
}

TEST_CASE("sparsity profile validation") {
  CHECK_THROWS_AS(SparsityProfile(4, {2, 1}, false), InputError);
  CHECK_THROWS_AS(SparsityProfile(4, {5}, false), InputError);
  const SparsityProfile unsat(10, {3, 5}, false);
  CHECK_THROWS_AS(unsat.at(3), InputError);
  CHECK(constant_profile(8, 8).at(1000) == 8);
}
