#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace deloc {

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected interaction graph over d coordinates. Adjacency lists are sorted
/// and always contain the node itself (i ~ i). Immutable after construction.
class InteractionGraph {
 public:
  /// Builds from an edge list; self-loops are implied and duplicates ignored.
  InteractionGraph(std::size_t d, std::span<const Edge> edges);

  static InteractionGraph path(std::size_t d);
  static InteractionGraph lattice2d(std::size_t rows, std::size_t cols);
  /// Every pair connected. Stored in O(d): all nodes share one adjacency list.
  static InteractionGraph complete(std::size_t d);
  /// Parses "i j" lines (0-indexed). Blank lines and '#' comments are skipped.
  /// Without `d`, the dimension is one past the largest index seen.
  static InteractionGraph parse_edge_list(std::istream& in, std::optional<std::size_t> d = std::nullopt);
  static InteractionGraph read_edge_list(const std::filesystem::path& path,
                                         std::optional<std::size_t> d = std::nullopt);

  std::size_t dim() const { return d_; }
  bool is_complete() const { return complete_; }
  /// Sorted neighbors of i, including i.
  std::span<const std::size_t> neighbors(std::size_t i) const;
  /// Number of neighbors other than i itself.
  std::size_t degree(std::size_t i) const { return neighbors(i).size() - 1; }
  std::size_t max_degree() const;
  bool adjacent(std::size_t i, std::size_t j) const;
  /// Edges (i, j) with i < j in lexicographic order.
  std::vector<Edge> edges() const;

 private:
  InteractionGraph() = default;
  void check_node(std::size_t i) const;

  std::size_t d_ = 0;
  bool complete_ = false;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> indices_;
};

/// Nodes within k hops of i: N_1(i) = adj(i), N_k(i) = union of adj(j) over
/// j in N_{k-1}(i). Sorted ascending.
std::vector<std::size_t> neighborhood_k(const InteractionGraph& g, std::size_t i, std::size_t k);

/// All-pairs hop distances (with dist(i, i) = 0), row-major d x d. Unreachable
/// pairs hold SIZE_MAX.
std::vector<std::size_t> hop_distances(const InteractionGraph& g);

/// s_k = max_i |N_k(i)| for k = 1..k_max.
class SparsityProfile {
 public:
  SparsityProfile(std::size_t d, std::vector<std::size_t> s, bool saturated);

  std::size_t dim() const { return d_; }
  std::size_t k_max() const { return s_.size(); }
  /// s_k for k >= 1. Beyond k_max only when the profile is known to have
  /// stopped growing; otherwise throws InputError.
  std::size_t at(std::size_t k) const;
  /// True when every neighborhood reached its connected component, so s_k is
  /// constant from k_max on.
  bool saturated() const { return saturated_; }
  const std::vector<std::size_t>& values() const { return s_; }

 private:
  std::size_t d_;
  std::vector<std::size_t> s_;
  bool saturated_;
};

SparsityProfile sparsity_profile(const InteractionGraph& g, std::size_t k_max);

/// Profile from explicit values, e.g. s_k = d for a dense model.
SparsityProfile constant_profile(std::size_t d, std::size_t value);

}  // namespace deloc
