#include "wire/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>
#include <string>

namespace wire {

Graph Graph::from_edges(int n, std::vector<std::pair<int, int>> edges) {
  if (n <= 0) throw std::invalid_argument("graph must have at least one node");
  Graph g;
  g.n_ = n;
  g.edges_.reserve(edges.size());
  for (auto& [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw std::invalid_argument("edge endpoint out of range: (" +
                                  std::to_string(a) + "," + std::to_string(b) + ")");
    if (a == b)
      throw std::invalid_argument("self-loop at node " + std::to_string(a));
    g.edges_.push_back({std::min(a, b), std::max(a, b)});
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  if (std::adjacent_find(g.edges_.begin(), g.edges_.end()) != g.edges_.end())
    throw std::invalid_argument("duplicate edge");

  std::vector<int> deg(n, 0);
  for (const auto& e : g.edges_) {
    ++deg[e[0]];
    ++deg[e[1]];
  }
  g.offsets_.assign(n + 1, 0);
  for (int v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + deg[v];
  g.adjacency_.assign(g.offsets_[n], 0);
  std::vector<int> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& e : g.edges_) {
    g.adjacency_[fill[e[0]]++] = e[1];
    g.adjacency_[fill[e[1]]++] = e[0];
  }
  for (int v = 0; v < n; ++v)
    std::sort(g.adjacency_.begin() + g.offsets_[v],
              g.adjacency_.begin() + g.offsets_[v + 1]);
  return g;
}

bool Graph::has_edge(int i, int j) const {
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

void Graph::set_colors(std::vector<int> colors) {
  if (static_cast<int>(colors.size()) != n_)
    throw std::invalid_argument("color count must equal node count");
  colors_ = std::move(colors);
}

void Graph::set_points(std::vector<Point3> points) {
  if (static_cast<int>(points.size()) != n_)
    throw std::invalid_argument("point count must equal node count");
  points_ = std::move(points);
}

Graph Graph::permuted(const std::vector<int>& perm) const {
  if (static_cast<int>(perm.size()) != n_)
    throw std::invalid_argument("permutation size mismatch");
  std::vector<std::pair<int, int>> new_edges;
  new_edges.reserve(edges_.size());
  for (const auto& e : edges_) new_edges.emplace_back(perm[e[0]], perm[e[1]]);
  Graph g = from_edges(n_, std::move(new_edges));
  if (colors_) {
    std::vector<int> c(n_);
    for (int v = 0; v < n_; ++v) c[perm[v]] = (*colors_)[v];
    g.set_colors(std::move(c));
  }
  if (points_) {
    std::vector<Point3> p(n_);
    for (int v = 0; v < n_; ++v) p[perm[v]] = (*points_)[v];
    g.set_points(std::move(p));
  }
  return g;
}

Eigen::MatrixXd laplacian(const Graph& g, bool normalized) {
  const int n = g.n_nodes();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (int v = 0; v < n; ++v) {
    lap(v, v) = g.degree(v);
    for (int u : g.neighbors(v)) lap(v, u) = -1.0;
  }
  if (!normalized) return lap;
  Eigen::VectorXd inv_sqrt(n);
  for (int v = 0; v < n; ++v) {
    const int d = g.degree(v);
    inv_sqrt[v] = d > 0 ? 1.0 / std::sqrt(static_cast<double>(d)) : 0.0;
  }
  return inv_sqrt.asDiagonal() * lap * inv_sqrt.asDiagonal();
}

namespace {

// BFS over edges passing the given predicate; returns component sizes.
template <typename EdgeOk>
std::vector<int> component_sizes(const Graph& g, EdgeOk edge_ok) {
  const int n = g.n_nodes();
  std::vector<int> comp(n, -1);
  std::vector<int> sizes;
  std::deque<int> queue;
  for (int start = 0; start < n; ++start) {
    if (comp[start] >= 0) continue;
    const int c = static_cast<int>(sizes.size());
    sizes.push_back(0);
    comp[start] = c;
    queue.push_back(start);
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      ++sizes[c];
      for (int u : g.neighbors(v)) {
        if (comp[u] < 0 && edge_ok(v, u)) {
          comp[u] = c;
          queue.push_back(u);
        }
      }
    }
  }
  return sizes;
}

}  // namespace

int largest_monochromatic_subgraph(const Graph& g) {
  if (!g.colors())
    throw std::invalid_argument("monochromatic subgraph task requires node colors");
  const auto& colors = *g.colors();
  const auto sizes = component_sizes(
      g, [&](int v, int u) { return colors[v] == colors[u]; });
  return *std::max_element(sizes.begin(), sizes.end());
}

std::optional<int> shortest_path_distance(const Graph& g, int source, int target) {
  const int n = g.n_nodes();
  if (source < 0 || source >= n || target < 0 || target >= n)
    throw std::invalid_argument("node index out of range");
  if (source == target) return 0;
  std::vector<int> dist(n, -1);
  dist[source] = 0;
  std::deque<int> queue{source};
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int u : g.neighbors(v)) {
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        if (u == target) return dist[u];
        queue.push_back(u);
      }
    }
  }
  return std::nullopt;
}

Graph gen_grid_deleted(int rows, int cols, int n_delete, Rng& rng) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("grid must be nonempty");
  std::vector<std::pair<int, int>> edges;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int v = r * cols + c;
      if (c + 1 < cols) edges.emplace_back(v, v + 1);
      if (r + 1 < rows) edges.emplace_back(v, v + cols);
    }
  }
  const int total = static_cast<int>(edges.size());
  if (n_delete < 0 || n_delete > total)
    throw std::invalid_argument("n_delete exceeds grid edge count " +
                                std::to_string(total));
  // Partial Fisher-Yates: the first n_delete slots end up a uniform sample
  // of distinct edges.
  for (int i = 0; i < n_delete; ++i) {
    const int j = i + static_cast<int>(rng.below(total - i));
    std::swap(edges[i], edges[j]);
  }
  edges.erase(edges.begin(), edges.begin() + n_delete);
  return Graph::from_edges(rows * cols, std::move(edges));
}

Graph gen_watts_strogatz(int n, int k, double p, Rng& rng) {
  if (k <= 0 || k % 2 != 0 || k >= n)
    throw std::invalid_argument("Watts-Strogatz requires even k with 0 < k < n");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("p must be in [0, 1]");

  std::set<std::pair<int, int>> edge_set;
  auto canon = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  for (int j = 1; j <= k / 2; ++j)
    for (int v = 0; v < n; ++v) edge_set.insert(canon(v, (v + j) % n));

  std::vector<int> degree(n, k);
  // Rewire ring edges in construction order: for each lattice offset j and
  // node v, edge (v, v+j) keeps endpoint v and moves the other end.
  for (int j = 1; j <= k / 2; ++j) {
    for (int v = 0; v < n; ++v) {
      if (rng.uniform() >= p) continue;
      const int old_u = (v + j) % n;
      if (!edge_set.count(canon(v, old_u))) continue;  // already moved away
      if (degree[v] >= n - 1) continue;                // no eligible target
      int w = static_cast<int>(rng.below(n));
      while (w == v || edge_set.count(canon(v, w))) w = static_cast<int>(rng.below(n));
      edge_set.erase(canon(v, old_u));
      edge_set.insert(canon(v, w));
      --degree[old_u];
      ++degree[w];
    }
  }
  std::vector<std::pair<int, int>> edges(edge_set.begin(), edge_set.end());
  return Graph::from_edges(n, std::move(edges));
}

Graph gen_knn_graph(const std::vector<Point3>& points, int k) {
  const int n = static_cast<int>(points.size());
  if (k <= 0 || k >= n)
    throw std::invalid_argument("knn graph requires 0 < k < n_points");
  for (const auto& p : points)
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2]))
      throw std::invalid_argument("non-finite point coordinate");

  auto dist2 = [&](int a, int b) {
    const double dx = points[a][0] - points[b][0];
    const double dy = points[a][1] - points[b][1];
    const double dz = points[a][2] - points[b][2];
    return dx * dx + dy * dy + dz * dz;
  };

  std::set<std::pair<int, int>> edge_set;
  std::vector<std::pair<double, int>> cand(n - 1);
  for (int i = 0; i < n; ++i) {
    int idx = 0;
    for (int j = 0; j < n; ++j)
      if (j != i) cand[idx++] = {dist2(i, j), j};
    // Sorting on (distance, index) breaks ties toward the lower index.
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    for (int t = 0; t < k; ++t)
      edge_set.insert({std::min(i, cand[t].second), std::max(i, cand[t].second)});
  }
  std::vector<std::pair<int, int>> edges(edge_set.begin(), edge_set.end());
  Graph g = Graph::from_edges(n, std::move(edges));
  g.set_points(points);
  return g;
}

}  // namespace wire
