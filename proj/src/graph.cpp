#include "deloc/graph.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "deloc/errors.hpp"

namespace deloc {

InteractionGraph::InteractionGraph(std::size_t d, std::span<const Edge> edges) : d_(d) {
  if (d == 0) throw InputError("graph dimension must be positive");
  std::vector<std::vector<std::size_t>> adj(d);
  for (std::size_t i = 0; i < d; ++i) adj[i].push_back(i);
  for (const auto& [i, j] : edges) {
    if (i >= d || j >= d) {
      throw InputError("edge (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range for d=" +
                       std::to_string(d));
    }
    if (i == j) continue;
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  offsets_.reserve(d + 1);
  offsets_.push_back(0);
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    indices_.insert(indices_.end(), list.begin(), list.end());
    offsets_.push_back(indices_.size());
  }
}

InteractionGraph InteractionGraph::path(std::size_t d) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < d; ++i) edges.emplace_back(i, i + 1);
  return InteractionGraph(d, edges);
}

InteractionGraph InteractionGraph::lattice2d(std::size_t rows, std::size_t cols) {
  std::vector<Edge> edges;
  auto id = [cols](std::size_t r, std::size_t c) { return r * cols + c; };
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
    }
  }
  return InteractionGraph(rows * cols, edges);
}

InteractionGraph InteractionGraph::complete(std::size_t d) {
  if (d == 0) throw InputError("graph dimension must be positive");
  InteractionGraph g;
  g.d_ = d;
  g.complete_ = true;
  g.indices_.resize(d);
  std::iota(g.indices_.begin(), g.indices_.end(), std::size_t{0});
  return g;
}

InteractionGraph InteractionGraph::parse_edge_list(std::istream& in, std::optional<std::size_t> d) {
  std::vector<Edge> edges;
  std::size_t max_index = 0;
  bool any = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long long i = 0;
    long long j = 0;
    if (!(fields >> i)) continue;
    if (!(fields >> j) || i < 0 || j < 0) {
      throw InputError("edge list line " + std::to_string(line_no) + ": expected two non-negative indices");
    }
    std::string extra;
    if (fields >> extra) throw InputError("edge list line " + std::to_string(line_no) + ": trailing content");
    edges.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    max_index = std::max({max_index, edges.back().first, edges.back().second});
    any = true;
  }
  const std::size_t dim = d ? *d : (any ? max_index + 1 : 0);
  return InteractionGraph(dim, edges);
}

InteractionGraph InteractionGraph::read_edge_list(const std::filesystem::path& path, std::optional<std::size_t> d) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open edge list " + path.string());
  return parse_edge_list(in, d);
}

void InteractionGraph::check_node(std::size_t i) const {
  if (i >= d_) throw InputError("node " + std::to_string(i) + " out of range for d=" + std::to_string(d_));
}

std::span<const std::size_t> InteractionGraph::neighbors(std::size_t i) const {
  check_node(i);
  if (complete_) return indices_;
  return std::span<const std::size_t>(indices_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

std::size_t InteractionGraph::max_degree() const {
  if (complete_) return d_ - 1;
  std::size_t best = 0;
  for (std::size_t i = 0; i < d_; ++i) best = std::max(best, offsets_[i + 1] - offsets_[i] - 1);
  return best;
}

bool InteractionGraph::adjacent(std::size_t i, std::size_t j) const {
  check_node(j);
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<Edge> InteractionGraph::edges() const {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t j : neighbors(i)) {
      if (j > i) out.emplace_back(i, j);
    }
  }
  return out;
}

namespace {

// Layered BFS from `source`; calls visit(depth, layer_size) for depth 1.. while
// the frontier is non-empty and depth <= k_max. Returns true if BFS exhausted
// the component before k_max.
template <typename Visit>
bool bfs_layers(const InteractionGraph& g, std::size_t source, std::size_t k_max, std::vector<std::size_t>& stamp,
                std::size_t mark, Visit&& visit) {
  std::vector<std::size_t> frontier{source};
  std::vector<std::size_t> next;
  stamp[source] = mark;
  std::size_t reached = 1;
  for (std::size_t depth = 1; depth <= k_max; ++depth) {
    next.clear();
    for (std::size_t u : frontier) {
      for (std::size_t v : g.neighbors(u)) {
        if (stamp[v] != mark) {
          stamp[v] = mark;
          next.push_back(v);
        }
      }
    }
    reached += next.size();
    visit(depth, reached, next);
    if (next.empty()) return true;
    frontier.swap(next);
  }
  return false;
}

}  // namespace

std::vector<std::size_t> neighborhood_k(const InteractionGraph& g, std::size_t i, std::size_t k) {
  if (i >= g.dim()) throw InputError("node " + std::to_string(i) + " out of range for d=" + std::to_string(g.dim()));
  if (k == 0) throw InputError("neighborhood order k must be >= 1");
  if (g.is_complete()) {
    auto nb = g.neighbors(i);
    return {nb.begin(), nb.end()};
  }
  std::vector<std::size_t> stamp(g.dim(), 0);
  std::vector<std::size_t> out{i};
  bfs_layers(g, i, k, stamp, 1, [&](std::size_t, std::size_t, const std::vector<std::size_t>& layer) {
    out.insert(out.end(), layer.begin(), layer.end());
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> hop_distances(const InteractionGraph& g) {
  const std::size_t d = g.dim();
  std::vector<std::size_t> dist(d * d, std::numeric_limits<std::size_t>::max());
  std::vector<std::size_t> stamp(d, 0);
  for (std::size_t i = 0; i < d; ++i) {
    dist[i * d + i] = 0;
    bfs_layers(g, i, d, stamp, i + 1, [&](std::size_t depth, std::size_t, const std::vector<std::size_t>& layer) {
      for (std::size_t j : layer) dist[i * d + j] = depth;
    });
  }
  return dist;
}

SparsityProfile::SparsityProfile(std::size_t d, std::vector<std::size_t> s, bool saturated)
    : d_(d), s_(std::move(s)), saturated_(saturated) {
  if (s_.empty()) throw InputError("sparsity profile must have k_max >= 1");
  for (std::size_t k = 0; k < s_.size(); ++k) {
    if (s_[k] == 0 || s_[k] > d_) throw InputError("sparsity profile entries must lie in [1, d]");
    if (k > 0 && s_[k] < s_[k - 1]) throw InputError("sparsity profile must be nondecreasing");
  }
}

std::size_t SparsityProfile::at(std::size_t k) const {
  if (k == 0) throw InputError("sparsity index k must be >= 1");
  if (k <= s_.size()) return s_[k - 1];
  if (saturated_ || s_.back() == d_) return s_.back();
  throw InputError("sparsity profile too short: need s_" + std::to_string(k) + " but k_max=" +
                   std::to_string(s_.size()));
}

SparsityProfile sparsity_profile(const InteractionGraph& g, std::size_t k_max) {
  if (k_max == 0) throw InputError("k_max must be >= 1");
  const std::size_t d = g.dim();
  if (g.is_complete()) return SparsityProfile(d, std::vector<std::size_t>(k_max, d), true);
  std::vector<std::size_t> s(k_max, 1);
  std::vector<std::size_t> stamp(d, 0);
  bool all_exhausted = true;
  for (std::size_t i = 0; i < d; ++i) {
    std::size_t last = 1;
    std::size_t last_depth = 0;
    const bool exhausted =
        bfs_layers(g, i, k_max, stamp, i + 1, [&](std::size_t depth, std::size_t reached, const auto&) {
          s[depth - 1] = std::max(s[depth - 1], reached);
          last = reached;
          last_depth = depth;
        });
    // Neighborhood stopped growing: fill the tail with its final size.
    for (std::size_t depth = last_depth + 1; depth <= k_max; ++depth) s[depth - 1] = std::max(s[depth - 1], last);
    all_exhausted = all_exhausted && exhausted;
  }
  return SparsityProfile(d, std::move(s), all_exhausted);
}

SparsityProfile constant_profile(std::size_t d, std::size_t value) { return SparsityProfile(d, {value}, true); }

}  // namespace deloc
