#pragma once

#include "semirank/graph.hpp"
#include "semirank/io.hpp"
#include "semirank/rng.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace semirank {

// Numerically stable sigmoid and log(1 + e^x).
inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double ex = std::exp(x);
  return ex / (1.0 + ex);
}
inline double log1pexp(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Latent BTL scores, centered so 1^T theta = 0.
struct BTLInstance {
  Eigen::VectorXd theta_star;
  int k_top = 0;
  double delta_k = 0;

  double kappa() const {
    return std::exp(theta_star.maxCoeff() - theta_star.minCoeff());
  }
};

// Averaged win rates, one per edge of the associated graph. For the edge
// (lo, hi), y is the fraction of the L outcomes won by the lower-indexed
// item; the complementary rate 1 - y is the one entering the likelihood as
// the win rate of the higher-indexed item.
struct ComparisonData {
  Eigen::VectorXd y;
  int reps = 1;
};

// Erdos-Renyi G(n, p): each unordered pair independently with probability p.
// Every pair draws from its own (seed, i, j) substream. er_mask is all true.
inline Graph gen_er(int n, double p, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_er: need n >= 2");
  if (!(p > 0.0) || p > 1.0)
    throw std::invalid_argument("gen_er: p must be in (0, 1]");
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::uint8_t> mask;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      SplitMix64 rng(substream(seed, {stream_tag::er,
                                      static_cast<std::uint64_t>(i),
                                      static_cast<std::uint64_t>(j)}));
      if (rng.uniform() < p) {
        pairs.emplace_back(i, j);
        mask.push_back(1);
      }
    }
  return Graph::from_pairs(n, std::move(pairs), &mask);
}

namespace detail {
// k distinct values from {base, ..., base + pool - 1}, partial Fisher-Yates.
inline std::vector<int> sample_subset(int base, int pool, int k,
                                      SplitMix64& rng) {
  std::vector<int> items(static_cast<std::size_t>(pool));
  for (int i = 0; i < pool; ++i) items[static_cast<std::size_t>(i)] = base + i;
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.uniform_int(
                          static_cast<std::uint64_t>(pool - i)));
    std::swap(items[static_cast<std::size_t>(i)], items[static_cast<std::size_t>(j)]);
  }
  items.resize(static_cast<std::size_t>(k));
  return items;
}
}  // namespace detail

// Monotone clique adversary: picks A (floor(n/3) vertices among the first
// n/2) and B (same size among the last n/2) and adds all edges within A and
// within B. Added edges get er_mask = false; existing edges keep their mask.
// Requires even n so the two halves are well-defined; n/3 is floored, which
// makes the planted max degree floor(n/3) - 1.
inline Graph apply_clique_adversary(const Graph& g, std::uint64_t seed) {
  const int n = g.num_vertices();
  if (n % 2 != 0)
    throw std::invalid_argument("apply_clique_adversary: n must be even");
  if (!g.has_er_mask())
    throw std::invalid_argument("apply_clique_adversary: graph lacks er_mask");
  SplitMix64 rng_a(substream(seed, {stream_tag::clique_a}));
  SplitMix64 rng_b(substream(seed, {stream_tag::clique_b}));
  const std::vector<int> a = detail::sample_subset(0, n / 2, n / 3, rng_a);
  const std::vector<int> b = detail::sample_subset(n / 2, n / 2, n / 3, rng_b);

  std::vector<std::pair<int, int>> pairs;
  std::vector<std::uint8_t> mask;
  for (int e = 0; e < g.num_edges(); ++e) {
    pairs.emplace_back(g.edge(e).lo, g.edge(e).hi);
    mask.push_back(g.er_mask()[static_cast<std::size_t>(e)]);
  }
  auto add_clique = [&](const std::vector<int>& s) {
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = i + 1; j < s.size(); ++j) {
        pairs.emplace_back(s[i], s[j]);
        mask.push_back(0);
      }
  };
  add_clique(a);
  add_clique(b);
  return Graph::from_pairs(n, std::move(pairs), &mask);
}

// Cluster sampling: pair (i, j) appears with probability p_t when both
// endpoints are in cluster t and probability q otherwise. A single uniform
// draw per pair couples the graph with its hidden ER(n, q) subgraph, which
// is exactly the set of pairs with draw <= q (marked in er_mask).
inline Graph gen_cluster_graph(const std::vector<int>& sizes,
                               const std::vector<double>& p_within, double q,
                               std::uint64_t seed) {
  if (sizes.empty() || sizes.size() != p_within.size())
    throw std::invalid_argument("gen_cluster_graph: sizes/p_within mismatch");
  if (!(q > 0.0) || q > 1.0)
    throw std::invalid_argument("gen_cluster_graph: q must be in (0, 1]");
  int n = 0;
  for (std::size_t t = 0; t < sizes.size(); ++t) {
    if (sizes[t] < 1) throw std::invalid_argument("gen_cluster_graph: bad size");
    if (!(p_within[t] > 0.0) || p_within[t] > 1.0)
      throw std::invalid_argument("gen_cluster_graph: p_t must be in (0, 1]");
    if (q > p_within[t])
      throw std::invalid_argument("gen_cluster_graph: requires q <= min p_t");
    n += sizes[t];
  }
  std::vector<int> cluster_of(static_cast<std::size_t>(n));
  {
    int v = 0;
    for (std::size_t t = 0; t < sizes.size(); ++t)
      for (int i = 0; i < sizes[t]; ++i) cluster_of[static_cast<std::size_t>(v++)] = static_cast<int>(t);
  }
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::uint8_t> mask;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      SplitMix64 rng(substream(seed, {stream_tag::cluster,
                                      static_cast<std::uint64_t>(i),
                                      static_cast<std::uint64_t>(j)}));
      const double d = rng.uniform();
      const bool same = cluster_of[static_cast<std::size_t>(i)] == cluster_of[static_cast<std::size_t>(j)];
      const double thr = same ? p_within[static_cast<std::size_t>(cluster_of[static_cast<std::size_t>(i)])] : q;
      if (d <= thr) {
        pairs.emplace_back(i, j);
        mask.push_back(d <= q ? 1 : 0);
      }
    }
  return Graph::from_pairs(n, std::move(pairs), &mask);
}

// Two-level experiment scores: Delta_K on the first K items, 0 elsewhere,
// then centered. Centering shifts every score equally, so no comparison
// probability changes.
inline BTLInstance gen_btl_scores(int n, int k, double delta_k) {
  if (k < 1 || k >= n) throw std::invalid_argument("gen_btl_scores: K out of range");
  if (!(delta_k > 0)) throw std::invalid_argument("gen_btl_scores: delta_k must be > 0");
  BTLInstance b;
  b.theta_star = Eigen::VectorXd::Zero(n);
  b.theta_star.head(k).setConstant(delta_k);
  b.theta_star.array() -= b.theta_star.mean();
  b.k_top = k;
  b.delta_k = delta_k;
  return b;
}

// L Bernoulli outcomes per edge, averaged. Each edge owns the substream
// (seed, lo, hi), so draws are independent of edge enumeration order and of
// which supergraph the edge is sampled in. Outcomes depend on theta only
// through the difference theta_lo - theta_hi.
inline ComparisonData sample_comparisons(const Graph& g, const BTLInstance& b,
                                         int reps, std::uint64_t seed) {
  if (reps < 1) throw std::invalid_argument("sample_comparisons: L >= 1 required");
  if (b.theta_star.size() != g.num_vertices())
    throw std::invalid_argument("sample_comparisons: theta size mismatch");
  ComparisonData data;
  data.reps = reps;
  data.y.resize(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto [lo, hi] = g.edge(e);
    const double p_low_wins = sigmoid(b.theta_star(lo) - b.theta_star(hi));
    SplitMix64 rng(substream(seed, {stream_tag::compare,
                                    static_cast<std::uint64_t>(lo),
                                    static_cast<std::uint64_t>(hi)}));
    int wins = 0;
    for (int l = 0; l < reps; ++l)
      if (rng.uniform() < p_low_wins) ++wins;
    data.y(e) = static_cast<double>(wins) / reps;
  }
  return data;
}

// Comparison file format: header "L", then one line "i j y" per edge with
// i > j (so i is the higher-indexed endpoint and y is the win rate of j).
inline void write_comparison_file(const std::string& path, const Graph& g,
                                  const ComparisonData& data) {
  if (data.y.size() != g.num_edges())
    throw std::invalid_argument("write_comparison_file: size mismatch");
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write comparison file: " + path);
  out << data.reps << '\n';
  for (int e = 0; e < g.num_edges(); ++e)
    out << g.edge(e).hi << ' ' << g.edge(e).lo << ' '
        << format_double(data.y(e)) << '\n';
  if (!out) throw std::invalid_argument("failed writing comparison file: " + path);
}

inline ComparisonData read_comparison_file(const std::string& path,
                                           const Graph& g) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open comparison file: " + path);
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw std::invalid_argument(path + ":1: missing header \"L\"");
  ComparisonData data;
  {
    std::istringstream ss(line);
    if (!(ss >> data.reps) || data.reps < 1)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": bad L");
  }
  data.y = Eigen::VectorXd::Constant(g.num_edges(),
                                     std::numeric_limits<double>::quiet_NaN());
  while (next_line()) {
    std::istringstream ss(line);
    int i = 0, j = 0;
    double y = 0;
    if (!(ss >> i >> j >> y))
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected \"i j y\"");
    const int e = g.find_edge(i, j);
    if (e < 0)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": edge not in graph");
    data.y(e) = y;
  }
  for (int e = 0; e < g.num_edges(); ++e)
    if (std::isnan(data.y(e)))
      throw std::invalid_argument(path + ": missing comparison for an edge");
  return data;
}

}  // namespace semirank
