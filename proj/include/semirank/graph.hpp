#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace semirank {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Nonnegative edge weights, one per edge of an associated Graph.
using WeightVector = Eigen::VectorXd;

// Undirected edge with endpoints stored as (lo, hi), lo < hi.
struct Edge {
  int lo = 0;
  int hi = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Undirected simple graph. Edges are kept canonical: (min, max) pairs sorted
// lexicographically, deduplicated; the weight index of an edge is its
// position in this list, which keeps weight vectors stable across modules
// and file round-trips. `er_mask`, when present, marks the edges of the
// hidden random base graph (simulation metadata only).
class Graph {
 public:
  Graph() = default;

  // Canonicalizes, sorts and deduplicates. Optional per-edge mask must be
  // given in the same order as `pairs`.
  static Graph from_pairs(int n, std::vector<std::pair<int, int>> pairs,
                          const std::vector<std::uint8_t>* mask = nullptr) {
    if (n < 2) throw std::invalid_argument("Graph: need n >= 2");
    if (mask && mask->size() != pairs.size())
      throw std::invalid_argument("Graph: er_mask size mismatch");
    struct Item {
      Edge e;
      std::uint8_t m;
    };
    std::vector<Item> items;
    items.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      auto [a, b] = pairs[i];
      if (a == b) throw std::invalid_argument("Graph: self-loop");
      if (a < 0 || b < 0 || a >= n || b >= n)
        throw std::invalid_argument("Graph: endpoint out of range");
      if (a > b) std::swap(a, b);
      items.push_back({Edge{a, b}, mask ? (*mask)[i] : std::uint8_t{0}});
    }
    std::sort(items.begin(), items.end(),
              [](const Item& x, const Item& y) { return x.e < y.e; });
    Graph g;
    g.n_ = n;
    if (mask) g.er_mask_.emplace();
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i > 0 && items[i].e == items[i - 1].e) {
        // duplicate: a masked copy wins so that adversaries adding an
        // existing edge never clear its base-graph membership
        if (mask && items[i].m) g.er_mask_->back() = 1;
        continue;
      }
      g.edges_.push_back(items[i].e);
      if (mask) g.er_mask_->push_back(items[i].m);
    }
    return g;
  }

  int num_vertices() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }

  bool has_er_mask() const { return er_mask_.has_value(); }
  const std::vector<std::uint8_t>& er_mask() const {
    if (!er_mask_) throw std::logic_error("Graph: no er_mask present");
    return *er_mask_;
  }

  // Edge index by endpoints, -1 if absent.
  int find_edge(int a, int b) const {
    if (a > b) std::swap(a, b);
    const Edge key{a, b};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
    if (it == edges_.end() || !(*it == key)) return -1;
    return static_cast<int>(it - edges_.begin());
  }

  // Subgraph on the same vertex set keeping the edges where keep[e] != 0.
  Graph masked_subgraph(const std::vector<std::uint8_t>& keep) const {
    if (static_cast<int>(keep.size()) != num_edges())
      throw std::invalid_argument("masked_subgraph: mask size mismatch");
    Graph g;
    g.n_ = n_;
    for (int e = 0; e < num_edges(); ++e)
      if (keep[static_cast<std::size_t>(e)]) g.edges_.push_back(edges_[static_cast<std::size_t>(e)]);
    return g;
  }

  Graph er_subgraph() const { return masked_subgraph(er_mask()); }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::optional<std::vector<std::uint8_t>> er_mask_;
};

namespace detail {
inline void check_weights(const Graph& g, const Eigen::VectorXd& w) {
  if (w.size() != g.num_edges())
    throw std::invalid_argument("weight vector does not match graph edge count");
}
}  // namespace detail

// L_w = sum_e w_e (e_i - e_j)(e_i - e_j)^T, dense. Symmetric PSD with zero
// row sums by construction.
template <typename Derived>
MatrixX<typename Derived::Scalar> build_laplacian(
    const Graph& g, const Eigen::MatrixBase<Derived>& w) {
  using Scalar = typename Derived::Scalar;
  if (w.size() != g.num_edges())
    throw std::invalid_argument("weight vector does not match graph edge count");
  const int n = g.num_vertices();
  MatrixX<Scalar> L = MatrixX<Scalar>::Zero(n, n);
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto [i, j] = g.edge(e);
    const Scalar we = w(e);
    L(i, i) += we;
    L(j, j) += we;
    L(i, j) -= we;
    L(j, i) -= we;
  }
  return L;
}

// Per-vertex weighted degrees; max/min entries give d_max/d_min.
template <typename Derived>
VectorX<typename Derived::Scalar> weighted_degrees(
    const Graph& g, const Eigen::MatrixBase<Derived>& w) {
  using Scalar = typename Derived::Scalar;
  if (w.size() != g.num_edges())
    throw std::invalid_argument("weight vector does not match graph edge count");
  VectorX<Scalar> d = VectorX<Scalar>::Zero(g.num_vertices());
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto [i, j] = g.edge(e);
    d(i) += w(e);
    d(j) += w(e);
  }
  return d;
}

// Matrix-free y = L_w * x on each column of x; no n-by-n matrix is formed.
template <typename DerivedW, typename DerivedX>
MatrixX<typename DerivedX::Scalar> apply_laplacian(
    const Graph& g, const Eigen::MatrixBase<DerivedW>& w,
    const Eigen::MatrixBase<DerivedX>& x) {
  using Scalar = typename DerivedX::Scalar;
  if (w.size() != g.num_edges())
    throw std::invalid_argument("weight vector does not match graph edge count");
  MatrixX<Scalar> y = MatrixX<Scalar>::Zero(x.rows(), x.cols());
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto [i, j] = g.edge(e);
    const Scalar we = static_cast<Scalar>(w(e));
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const Scalar d = we * (x(i, c) - x(j, c));
      y(i, c) += d;
      y(j, c) -= d;
    }
  }
  return y;
}

namespace detail {
// Union-find over the edges with weight above tol.
class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n) {
    for (int i = 0; i < n; ++i) parent_[static_cast<std::size_t>(i)] = i;
  }
  int find(int a) {
    while (parent_[static_cast<std::size_t>(a)] != a) {
      parent_[static_cast<std::size_t>(a)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(a)])];
      a = parent_[static_cast<std::size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) { parent_[static_cast<std::size_t>(find(a))] = find(b); }

 private:
  std::vector<int> parent_;
};
}  // namespace detail

inline constexpr double kConnectivityTol = 1e-12;

// True iff the subgraph of edges with w_e > tol spans all n vertices.
inline bool is_connected(const Graph& g, const WeightVector& w,
                         double tol = kConnectivityTol) {
  detail::check_weights(g, w);
  if (tol < 0) throw std::invalid_argument("is_connected: tol must be >= 0");
  detail::DisjointSets ds(g.num_vertices());
  for (int e = 0; e < g.num_edges(); ++e)
    if (w(e) > tol) ds.unite(g.edge(e).lo, g.edge(e).hi);
  const int root = ds.find(0);
  for (int v = 1; v < g.num_vertices(); ++v)
    if (ds.find(v) != root) return false;
  return true;
}

// Connected components over edges with w_e > tol, as vertex lists.
inline std::vector<std::vector<int>> connected_components(
    const Graph& g, const WeightVector& w, double tol = kConnectivityTol) {
  detail::check_weights(g, w);
  detail::DisjointSets ds(g.num_vertices());
  for (int e = 0; e < g.num_edges(); ++e)
    if (w(e) > tol) ds.unite(g.edge(e).lo, g.edge(e).hi);
  std::vector<int> root_of(static_cast<std::size_t>(g.num_vertices()));
  std::vector<std::vector<int>> comps;
  std::vector<int> comp_id(static_cast<std::size_t>(g.num_vertices()), -1);
  for (int v = 0; v < g.num_vertices(); ++v) {
    const int r = ds.find(v);
    if (comp_id[static_cast<std::size_t>(r)] < 0) {
      comp_id[static_cast<std::size_t>(r)] = static_cast<int>(comps.size());
      comps.emplace_back();
    }
    comps[static_cast<std::size_t>(comp_id[static_cast<std::size_t>(r)])].push_back(v);
  }
  return comps;
}

// vol(S) = sum over i in S of the weighted degree of i.
template <typename Derived>
typename Derived::Scalar volume(const Graph& g,
                                const Eigen::MatrixBase<Derived>& w,
                                const std::vector<int>& s) {
  const auto deg = weighted_degrees(g, w);
  typename Derived::Scalar v{0};
  for (int i : s) {
    if (i < 0 || i >= g.num_vertices())
      throw std::invalid_argument("volume: vertex out of range");
    v += deg(i);
  }
  return v;
}

}  // namespace semirank
