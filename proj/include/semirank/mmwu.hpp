#pragma once

#include "semirank/graph.hpp"
#include "semirank/oracles.hpp"
#include "semirank/spectral.hpp"

#include <chrono>
#include <functional>

namespace semirank {

enum class OracleKind { kGreedy, kLp };

// Solver knobs. eta, T, the budget b and the sketch width all derive from
// (eps, p, n) unless overridden explicitly.
struct MMWUParams {
  double eps = 0.25;          // in (0, 1/2]
  double p = 0.0;             // nominal edge probability of the hidden graph
  int jl_dim = 0;             // 0: ceil(jl_constant * ln n / eps^2)
  double jl_constant = 24.0;  // desk-scale default; the proven constant is 120
  OracleKind oracle = OracleKind::kGreedy;
  std::uint64_t seed = 0;
  double exp_delta = 1e-6;    // exponential-action tolerance
  ExpMethod exp_method = ExpMethod::kAuto;
  int max_iters = 0;          // 0: ceil(8 ln n / eps^2); override only for probes

  void validate() const {
    if (!(eps > 0) || eps > 0.5)
      throw std::invalid_argument("MMWUParams: eps must be in (0, 1/2]");
    if (!(p > 0) || p > 1.0)
      throw std::invalid_argument("MMWUParams: p must be in (0, 1]");
    if (!(exp_delta > 0)) throw std::invalid_argument("MMWUParams: exp_delta > 0");
  }
  double eta(int n) const { return eps / (4.0 * p * n); }
  int iterations(int n) const {
    if (max_iters > 0) return max_iters;
    return static_cast<int>(std::ceil(8.0 * std::log(n) / (eps * eps)));
  }
  int sketch_dim(int n) const {
    if (jl_dim > 0) return jl_dim;
    return static_cast<int>(std::ceil(jl_constant * std::log(n) / (eps * eps)));
  }
  long long budget(int n) const { return std::llround(2.0 * p * n); }
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<std::string> violations;
};

// Membership in the feasible set: 0 <= w <= 1 per edge and weighted degree
// at most 2pn per vertex, each with 1e-9 slack.
inline FeasibilityReport verify_feasibility(const Graph& g,
                                            const WeightVector& w, double p) {
  detail::check_weights(g, w);
  FeasibilityReport r;
  const double tol = 1e-9;
  for (int e = 0; e < g.num_edges(); ++e) {
    if (!(w(e) >= -tol) || !(w(e) <= 1.0 + tol) || !std::isfinite(w(e))) {
      r.feasible = false;
      r.violations.push_back("edge (" + std::to_string(g.edge(e).lo) + "," +
                             std::to_string(g.edge(e).hi) +
                             "): w=" + std::to_string(w(e)));
    }
  }
  const double cap = 2.0 * p * g.num_vertices();
  const Eigen::VectorXd deg = weighted_degrees(g, w);
  for (int i = 0; i < g.num_vertices(); ++i) {
    if (deg(i) > cap + tol) {
      r.feasible = false;
      r.violations.push_back("vertex " + std::to_string(i) +
                             ": degree=" + std::to_string(deg(i)) + " > " +
                             std::to_string(cap));
    }
  }
  return r;
}

struct ReweightReport {
  WeightVector w_out;
  double lambda_gap = 0;
  bool feasible = false;
  std::vector<double> per_iter_loss;  // <L^(t), X~^(t)> as played
  double wall_ms = 0;
  int iterations = 0;
  int sketch_dim = 0;
  long long budget = 0;
};

namespace detail {

// Called once per iteration with the cumulative weights entering the
// exponent, the oracle response, the sketched gains and the normalized
// embedding (rows are the sketched vertex positions).
using MMWUObserver = std::function<void(
    int t, const WeightVector& w_cum, const WeightVector& response,
    const Eigen::VectorXd& gains, const Eigen::MatrixXd& embedding)>;

inline ReweightReport reweight_loop(const Graph& g, const MMWUParams& params,
                                    const MMWUObserver& observer) {
  params.validate();
  const int n = g.num_vertices();
  if (n < 2) throw std::invalid_argument("reweight: need n >= 2");
  const int m = g.num_edges();
  const long long b = params.budget(n);
  if (b < 1)
    throw std::invalid_argument(
        "reweight: budget 2pn rounds below 1; p too small for this n");
  const double eta = params.eta(n);
  const int iters = params.iterations(n);
  const int k = params.sketch_dim(n);

  const auto t_start = std::chrono::steady_clock::now();
  WeightVector w_cum = WeightVector::Zero(m);
  ReweightReport report;
  report.per_iter_loss.reserve(static_cast<std::size_t>(iters));
  for (int t = 0; t < iters; ++t) {
    const Eigen::MatrixXd r =
        jl_matrix(n, k, substream(params.seed, {static_cast<std::uint64_t>(t)}));
    // Gram factor: U U^T approximates exp(-eta sum w L), hence the eta/2.
    const Eigen::MatrixXd u = exp_action(g, w_cum, eta / 2.0, r,
                                         params.exp_delta, params.exp_method);
    const double denom = centered_gram_trace(u);
    if (!(denom > 0))
      throw std::runtime_error("reweight: degenerate sketch normalization");
    const Eigen::MatrixXd v = u / std::sqrt(denom);
    const Eigen::VectorXd gains = edge_gains(g, v);

    WeightVector response;
    if (params.oracle == OracleKind::kLp) {
      auto lp = approx_packing_oracle(g, gains, static_cast<int>(b), params.eps);
      response = lp ? *lp : greedy_b_matching(g, gains, static_cast<int>(b));
    } else {
      response = greedy_b_matching(g, gains, static_cast<int>(b));
    }
    report.per_iter_loss.push_back(gains.dot(response));
    if (observer) observer(t, w_cum, response, gains, v);
    w_cum += response;
  }
  report.w_out = w_cum / iters;
  report.lambda_gap = lambda_n_minus_1(build_laplacian(g, report.w_out));
  report.feasible = verify_feasibility(g, report.w_out, params.p).feasible;
  report.iterations = iters;
  report.sketch_dim = k;
  report.budget = b;
  report.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t_start)
                       .count();
  return report;
}

}  // namespace detail

// MMWU solver for the saddle-point SDP. Responses accumulate unaveraged in
// the exponent; the output is their average, feasible by convexity.
inline ReweightReport reweight(const Graph& g, const MMWUParams& params) {
  return detail::reweight_loop(g, params, nullptr);
}

// Per-iteration ledger for the regret bound, evaluated on the losses the
// solver actually played. With exact_updates the density matrices are the
// exact dense exponentials (n capped at 200); otherwise the sketched Gram
// factors stand in and the JL fidelity column stays empty.
struct RegretAudit {
  double lhs = 0;           // lambda_{n-1} of the summed losses
  double sum_loss = 0;      // sum_t <L^(t), X^(t)>
  double sum_sq_loss = 0;   // sum_t <(L^(t))^2, X^(t)>
  double entropy_term = 0;  // log(n) / eta
  double slack = 0;         // lhs - (sum_loss - eta sum_sq_loss - entropy)
  std::vector<double> per_iter_loss;
  std::vector<double> jl_within_fraction;  // share of gains within (1 +- 2eps)
  ReweightReport report;
};

inline RegretAudit regret_audit(const Graph& g, const MMWUParams& params,
                                bool exact_updates) {
  const int n = g.num_vertices();
  if (exact_updates && n > 200)
    throw std::invalid_argument("regret_audit: exact_updates capped at n <= 200");
  const double eta = params.eta(n);
  RegretAudit audit;
  Eigen::MatrixXd loss_sum = Eigen::MatrixXd::Zero(n, n);

  detail::MMWUObserver observer = [&](int, const WeightVector& w_cum,
                                      const WeightVector& response,
                                      const Eigen::VectorXd& gains,
                                      const Eigen::MatrixXd& embedding) {
    const Eigen::MatrixXd loss = build_laplacian(g, response);
    if (exact_updates) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          build_laplacian(g, w_cum));
      const Eigen::VectorXd decay = (-eta * es.eigenvalues().array()).exp();
      const Eigen::MatrixXd w_mat = es.eigenvectors() * decay.asDiagonal() *
                                    es.eigenvectors().transpose();
      const double denom = w_mat.trace() - w_mat.sum() / static_cast<double>(n);
      const Eigen::MatrixXd x = w_mat / denom;
      audit.per_iter_loss.push_back((loss.array() * x.array()).sum());
      audit.sum_loss += audit.per_iter_loss.back();
      audit.sum_sq_loss += ((loss * loss).array() * x.array()).sum();
      int within = 0;
      for (int e = 0; e < g.num_edges(); ++e) {
        const auto [i, j] = g.edge(e);
        const double exact = x(i, i) + x(j, j) - 2.0 * x(i, j);
        if (gains(e) >= (1.0 - 2.0 * params.eps) * exact &&
            gains(e) <= (1.0 + 2.0 * params.eps) * exact)
          ++within;
      }
      audit.jl_within_fraction.push_back(
          g.num_edges() > 0 ? static_cast<double>(within) / g.num_edges() : 1.0);
    } else {
      audit.per_iter_loss.push_back(gains.dot(response));
      audit.sum_loss += audit.per_iter_loss.back();
      // <(L^t)^2, V V^T> = ||L^t V||_F^2, matrix-free
      audit.sum_sq_loss += apply_laplacian(g, response, embedding).squaredNorm();
    }
    loss_sum += loss;
  };

  audit.report = detail::reweight_loop(g, params, observer);
  audit.lhs = lambda_n_minus_1(loss_sum);
  audit.entropy_term = std::log(n) / eta;
  audit.slack =
      audit.lhs - (audit.sum_loss - eta * audit.sum_sq_loss - audit.entropy_term);
  return audit;
}

}  // namespace semirank
