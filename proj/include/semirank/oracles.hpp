#pragma once

#include "semirank/graph.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

namespace semirank {

// Edge gains against a Gram-factor embedding: c_e = <L_e, V V^T>, which is
// the squared distance between the endpoint rows of V. O(k) per edge.
inline Eigen::VectorXd edge_gains(const Graph& g, const Eigen::MatrixXd& emb) {
  if (emb.rows() != g.num_vertices())
    throw std::invalid_argument("edge_gains: embedding row count mismatch");
  Eigen::VectorXd c(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto [i, j] = g.edge(e);
    c(e) = (emb.row(i) - emb.row(j)).squaredNorm();
  }
  return c;
}

namespace detail {
// Edge indices sorted by gain descending, index ascending on ties. The fixed
// tie-break makes the greedy a pure function of its inputs.
template <typename Derived>
std::vector<int> gain_order(const Eigen::MatrixBase<Derived>& c) {
  std::vector<int> order(static_cast<std::size_t>(c.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (c(a) != c(b)) return c(a) > c(b);
    return a < b;
  });
  return order;
}
}  // namespace detail

// Greedy fractional-b-matching response: walk edges in decreasing gain and
// take weight 1 while both endpoints have degree budget left. Edges of zero
// gain are never taken. The output is 0/1-valued, lies in the feasible set
// for any budget b >= 1 and achieves at least half the LP optimum.
template <typename Derived>
VectorX<typename Derived::Scalar> greedy_b_matching(
    const Graph& g, const Eigen::MatrixBase<Derived>& c, int b) {
  using Scalar = typename Derived::Scalar;
  if (c.size() != g.num_edges())
    throw std::invalid_argument("greedy_b_matching: gain size mismatch");
  if (b < 1) throw std::invalid_argument("greedy_b_matching: b >= 1 required");
  VectorX<Scalar> w = VectorX<Scalar>::Zero(g.num_edges());
  std::vector<int> deg(static_cast<std::size_t>(g.num_vertices()), 0);
  for (int e : detail::gain_order(c)) {
    if (!(c(e) > Scalar{0})) break;
    const auto [i, j] = g.edge(e);
    if (deg[static_cast<std::size_t>(i)] < b && deg[static_cast<std::size_t>(j)] < b) {
      w(e) = Scalar{1};
      ++deg[static_cast<std::size_t>(i)];
      ++deg[static_cast<std::size_t>(j)];
    }
  }
  return w;
}

// Feasible dual of the b-matching LP built from a greedy run. Weak duality
// puts the LP optimum below `value`; the per-vertex accounting of the greedy
// puts `value` below twice the greedy value, so the pair certifies the
// 1/2-approximation instance by instance.
template <typename Scalar>
struct DualCertificate {
  VectorX<Scalar> s;    // per-vertex prices
  VectorX<Scalar> ell;  // per-edge slacks
  Scalar value{};       // b * sum(s) + sum(ell)
};

// s_i is the gain of the last matching edge added at i, but only when the
// budget at i actually turned an incident edge away; otherwise 0. ell picks
// up whatever the vertex prices miss on matching edges.
template <typename Derived>
DualCertificate<typename Derived::Scalar> greedy_dual_certificate(
    const Graph& g, const Eigen::MatrixBase<Derived>& c, int b,
    const VectorX<typename Derived::Scalar>& matching) {
  using Scalar = typename Derived::Scalar;
  if (c.size() != g.num_edges() || matching.size() != g.num_edges())
    throw std::invalid_argument("greedy_dual_certificate: size mismatch");
  const int n = g.num_vertices();
  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  std::vector<Scalar> last_gain(static_cast<std::size_t>(n), Scalar{0});
  std::vector<std::uint8_t> sees_positive_unmatched(static_cast<std::size_t>(n), 0);
  for (int e : detail::gain_order(c)) {
    const auto [i, j] = g.edge(e);
    if (matching(e) != Scalar{0}) {
      ++deg[static_cast<std::size_t>(i)];
      ++deg[static_cast<std::size_t>(j)];
      last_gain[static_cast<std::size_t>(i)] = c(e);
      last_gain[static_cast<std::size_t>(j)] = c(e);
    } else if (c(e) > Scalar{0}) {
      sees_positive_unmatched[static_cast<std::size_t>(i)] = 1;
      sees_positive_unmatched[static_cast<std::size_t>(j)] = 1;
    }
  }
  DualCertificate<Scalar> cert;
  cert.s = VectorX<Scalar>::Zero(n);
  for (int i = 0; i < n; ++i)
    if (deg[static_cast<std::size_t>(i)] == b && sees_positive_unmatched[static_cast<std::size_t>(i)])
      cert.s(i) = last_gain[static_cast<std::size_t>(i)];
  cert.ell = VectorX<Scalar>::Zero(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto [i, j] = g.edge(e);
    if (matching(e) != Scalar{0})
      cert.ell(e) = std::max<Scalar>(c(e) - cert.s(i) - cert.s(j), Scalar{0});
    // feasibility: a violated constraint means the greedy replay is broken
    if (cert.s(i) + cert.s(j) + cert.ell(e) < c(e))
      throw std::logic_error("greedy_dual_certificate: infeasible dual");
  }
  cert.value = Scalar{b} * cert.s.sum() + cert.ell.sum();
  return cert;
}

// Exact solution of max <c, w> over {0 <= w <= 1, per-vertex degree <= b},
// stored in doubled form so that integral gains stay in exact arithmetic.
// The extreme points of the fractional b-matching polytope are
// half-integral, so enumerating w in {0, 1/2, 1}^E is exact.
template <typename Scalar>
struct HalfIntegralSolution {
  Scalar value2{};            // 2 * optimum
  std::vector<int> w2;        // per-edge doubled weights in {0, 1, 2}
  double value() const { return static_cast<double>(value2) / 2.0; }
  WeightVector weights() const {
    WeightVector w(static_cast<Eigen::Index>(w2.size()));
    for (std::size_t e = 0; e < w2.size(); ++e) w(static_cast<Eigen::Index>(e)) = w2[e] / 2.0;
    return w;
  }
};

inline constexpr int kExactLpMaxEdges = 20;

template <typename Derived>
HalfIntegralSolution<typename Derived::Scalar> exact_lp_oracle_small(
    const Graph& g, const Eigen::MatrixBase<Derived>& c, int b) {
  using Scalar = typename Derived::Scalar;
  const int m = g.num_edges();
  if (m > kExactLpMaxEdges)
    throw std::invalid_argument("exact_lp_oracle_small: instance too large");
  if (b < 1) throw std::invalid_argument("exact_lp_oracle_small: b >= 1 required");
  const std::vector<int> order = detail::gain_order(c);

  // suffix bounds with everything remaining at full weight
  std::vector<Scalar> suffix(static_cast<std::size_t>(m) + 1, Scalar{0});
  for (int k = m - 1; k >= 0; --k)
    suffix[static_cast<std::size_t>(k)] =
        suffix[static_cast<std::size_t>(k) + 1] +
        Scalar{2} * std::max<Scalar>(c(order[static_cast<std::size_t>(k)]), Scalar{0});

  HalfIntegralSolution<Scalar> best;
  best.w2.assign(static_cast<std::size_t>(m), 0);
  {
    // greedy incumbent tightens the pruning from the start
    const VectorX<Scalar> w = greedy_b_matching(g, c, b);
    for (int e = 0; e < m; ++e)
      if (w(e) != Scalar{0}) {
        best.w2[static_cast<std::size_t>(e)] = 2;
        best.value2 += Scalar{2} * c(e);
      }
  }

  std::vector<int> deg2(static_cast<std::size_t>(g.num_vertices()), 0);
  std::vector<int> cur(static_cast<std::size_t>(m), 0);
  const int cap2 = 2 * b;

  auto dfs = [&](auto&& self, int k, Scalar value2) -> void {
    if (k == m) {
      if (value2 > best.value2) {
        best.value2 = value2;
        best.w2 = cur;
      }
      return;
    }
    // the incumbent already achieves best.value2, so ties can be pruned too
    if (value2 + suffix[static_cast<std::size_t>(k)] <= best.value2) return;
    const int e = order[static_cast<std::size_t>(k)];
    const auto [i, j] = g.edge(e);
    for (int x : {2, 1, 0}) {
      if (deg2[static_cast<std::size_t>(i)] + x > cap2 || deg2[static_cast<std::size_t>(j)] + x > cap2) continue;
      deg2[static_cast<std::size_t>(i)] += x;
      deg2[static_cast<std::size_t>(j)] += x;
      cur[static_cast<std::size_t>(e)] = x;
      self(self, k + 1, value2 + Scalar{x} * c(e));
      deg2[static_cast<std::size_t>(i)] -= x;
      deg2[static_cast<std::size_t>(j)] -= x;
      cur[static_cast<std::size_t>(e)] = 0;
    }
  };
  dfs(dfs, 0, Scalar{0});
  return best;
}

// (1 - eps)-approximate packing response via multiplicative weights on the
// degree constraints. Every candidate is checked against a certified dual
// upper bound, so a returned vector always meets the contract; when the
// iteration budget runs out without certification the caller is told so and
// can fall back to the greedy response.
inline std::optional<WeightVector> approx_packing_oracle(const Graph& g,
                                                         const Eigen::VectorXd& c,
                                                         int b, double eps) {
  if (c.size() != g.num_edges())
    throw std::invalid_argument("approx_packing_oracle: gain size mismatch");
  if (!(eps > 0) || eps > 0.5)
    throw std::invalid_argument("approx_packing_oracle: eps must be in (0, 1/2]");
  if (b < 1) throw std::invalid_argument("approx_packing_oracle: b >= 1 required");
  const int n = g.num_vertices();
  const int m = g.num_edges();
  if (m == 0 || c.maxCoeff() <= 0.0) return WeightVector::Zero(m);

  const auto degrees_of = [&](const WeightVector& w) {
    return weighted_degrees(g, w);
  };
  const auto value_of = [&](const WeightVector& w) { return c.dot(w); };

  // greedy top-up of residual capacity, feasibility-preserving
  const auto polish = [&](WeightVector w) {
    Eigen::VectorXd deg = degrees_of(w);
    for (int e : detail::gain_order(c)) {
      if (!(c(e) > 0)) break;
      const auto [i, j] = g.edge(e);
      const double room = std::min({1.0 - w(e), b - deg(i), b - deg(j)});
      if (room > 0) {
        w(e) += room;
        deg(i) += room;
        deg(j) += room;
      }
    }
    return w;
  };

  // certified upper bound: min over t >= 0 of
  // sum_e max(c_e - t s_e, 0) + b t with s_e = p_u + p_v, sum p = 1
  const auto dual_bound = [&](const Eigen::VectorXd& p) {
    std::vector<std::pair<double, int>> bps;
    bps.reserve(static_cast<std::size_t>(m));
    Eigen::VectorXd s(m);
    for (int e = 0; e < m; ++e) {
      const auto [i, j] = g.edge(e);
      s(e) = p(i) + p(j);
      if (c(e) > 0 && s(e) > 0) bps.emplace_back(c(e) / s(e), e);
    }
    // slope of the bound in t is b - sum of s over still-active edges;
    // scan breakpoints from above until it turns nonnegative
    std::sort(bps.begin(), bps.end(), std::greater<>());
    double active_s = 0.0, t_opt = 0.0;
    for (const auto& [t_e, e] : bps) {
      active_s += s(e);
      if (active_s >= b) {
        t_opt = t_e;
        break;
      }
    }
    double val = b * t_opt;
    for (int e = 0; e < m; ++e) val += std::max(c(e) - t_opt * s(e), 0.0);
    return val;
  };

  WeightVector best_w = polish(greedy_b_matching(g, c, b).cast<double>());
  double best_val = value_of(best_w);
  double bound = dual_bound(Eigen::VectorXd::Constant(n, 1.0 / n));

  Eigen::VectorXd p = Eigen::VectorXd::Constant(n, 1.0 / n);
  WeightVector w_sum = WeightVector::Zero(m);
  const int max_iters = 400 + 40 * m;
  const double mwu_rate = 0.25;
  for (int iter = 1; iter <= max_iters; ++iter) {
    if (best_val >= (1.0 - eps) * bound) return best_w;
    // fractional knapsack against the aggregated constraint <s, w> <= b
    Eigen::VectorXd s(m);
    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    for (int e = 0; e < m; ++e) {
      const auto [i, j] = g.edge(e);
      s(e) = p(i) + p(j);
    }
    std::sort(order.begin(), order.end(), [&](int a, int bb) {
      const double ra = s(a) > 0 ? c(a) / s(a) : std::numeric_limits<double>::infinity();
      const double rb = s(bb) > 0 ? c(bb) / s(bb) : std::numeric_limits<double>::infinity();
      if (ra != rb) return ra > rb;
      return a < bb;
    });
    WeightVector w_knap = WeightVector::Zero(m);
    double capacity = b;
    for (int e : order) {
      if (!(c(e) > 0) || capacity <= 0) break;
      const double take = s(e) > 0 ? std::min(1.0, capacity / s(e)) : 1.0;
      w_knap(e) = take;
      capacity -= take * s(e);
    }
    w_sum += w_knap;
    WeightVector w_avg = w_sum / iter;
    const double viol = (degrees_of(w_avg).maxCoeff()) / b;
    WeightVector cand = polish(viol > 1.0 ? (w_avg / viol).eval() : w_avg);
    const double val = value_of(cand);
    if (val > best_val) {
      best_val = val;
      best_w = cand;
    }
    const Eigen::VectorXd deg = degrees_of(w_knap);
    for (int i = 0; i < n; ++i) p(i) *= std::exp(mwu_rate * (deg(i) / b - 1.0));
    p /= p.sum();
    bound = std::min(bound, dual_bound(p));
  }
  if (best_val >= (1.0 - eps) * bound) return best_w;
  return std::nullopt;
}

}  // namespace semirank
