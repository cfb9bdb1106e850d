#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "wire/rng.hpp"

namespace wire {

using Point3 = std::array<double, 3>;

/// Undirected simple graph in compressed sparse adjacency form, with
/// optional node colors and optional 3D point coordinates.
///
/// Invariants: no self-loops, each edge stored once as an unordered pair
/// (canonically i < j, lexicographically sorted), adjacency symmetric,
/// all indices in [0, n). Instances are immutable after construction and
/// safe to share across threads.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from an edge list. Throws std::invalid_argument on
  /// self-loops, duplicate edges, or out-of-range indices.
  static Graph from_edges(int n, std::vector<std::pair<int, int>> edges);

  int n_nodes() const { return n_; }
  int n_edges() const { return static_cast<int>(edges_.size()); }
  int degree(int v) const { return offsets_[v + 1] - offsets_[v]; }
  std::span<const int> neighbors(int v) const {
    return {adjacency_.data() + offsets_[v],
            static_cast<std::size_t>(degree(v))};
  }
  bool has_edge(int i, int j) const;

  /// Canonical edge list: i < j, sorted lexicographically.
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }

  const std::optional<std::vector<int>>& colors() const { return colors_; }
  const std::optional<std::vector<Point3>>& points() const { return points_; }
  void set_colors(std::vector<int> colors);
  void set_points(std::vector<Point3> points);

  /// Relabels nodes: node i becomes perm[i]. perm must be a permutation.
  Graph permuted(const std::vector<int>& perm) const;

 private:
  int n_ = 0;
  std::vector<int> offsets_;    // n + 1
  std::vector<int> adjacency_;  // 2 * |E|, each row sorted
  std::vector<std::array<int, 2>> edges_;
  std::optional<std::vector<int>> colors_;
  std::optional<std::vector<Point3>> points_;
};

/// Graph Laplacian L = D - A, or D^{-1/2} L D^{-1/2} when normalized.
/// Rows/columns of isolated nodes are zero in the normalized variant.
Eigen::MatrixXd laplacian(const Graph& g, bool normalized = false);

/// Node count of the largest connected component of the subgraph induced by
/// keeping only edges whose endpoints share a color. Isolated nodes count as
/// size-1 components. Requires node colors.
int largest_monochromatic_subgraph(const Graph& g);

/// BFS hop count from source to target; std::nullopt when unreachable.
std::optional<int> shortest_path_distance(const Graph& g, int source, int target);

/// rows x cols 2D grid (node id = row * cols + col) with exactly n_delete
/// distinct uniformly chosen edges removed. May be disconnected.
Graph gen_grid_deleted(int rows, int cols, int n_delete, Rng& rng);

/// Standard Watts-Strogatz small-world graph: ring lattice with k neighbours
/// per node (k/2 per side), each original edge rewired with probability p to
/// a uniform new endpoint avoiding self-loops and duplicates.
Graph gen_watts_strogatz(int n, int k, double p, Rng& rng);

/// k-nearest-neighbour graph over a point cloud, symmetrized by union.
/// Distance ties break toward the lower node index.
Graph gen_knn_graph(const std::vector<Point3>& points, int k);

}  // namespace wire
