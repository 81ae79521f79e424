#pragma once

#include "semirank/graph.hpp"
#include "semirank/sampling.hpp"
#include "semirank/spectral.hpp"

#include <Eigen/Cholesky>

#include <fstream>
#include <numeric>

namespace semirank {

// The likelihood below is written per canonical edge (lo, hi) in terms of
// diff = theta_hi - theta_lo and the win rate of the higher-indexed item,
// y_hi = 1 - y. At the optimum sigmoid(diff) = y_hi edge by edge when the
// fit is exact.

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DivergenceError : public SolverError {
 public:
  using SolverError::SolverError;
};
class DisconnectedError : public SolverError {
 public:
  using SolverError::SolverError;
};

namespace detail {
inline void check_mle_args(const Graph& g, const ComparisonData& data,
                           const WeightVector& w) {
  if (data.y.size() != g.num_edges())
    throw std::invalid_argument("comparison data does not match graph edge count");
  check_weights(g, w);
}
}  // namespace detail

// Weighted negative log-likelihood
// sum_e w_e ( -y_hi * diff + log(1 + e^diff) ).
inline double nll(const Eigen::VectorXd& theta, const Graph& g,
                  const ComparisonData& data, const WeightVector& w) {
  detail::check_mle_args(g, data, w);
  if (theta.size() != g.num_vertices())
    throw std::invalid_argument("nll: theta size mismatch");
  double total = 0.0;
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto [lo, hi] = g.edge(e);
    const double diff = theta(hi) - theta(lo);
    const double y_hi = 1.0 - data.y(e);
    total += w(e) * (-y_hi * diff + log1pexp(diff));
  }
  return total;
}

// Gradient sum_e w_e (sigmoid(diff) - y_hi)(e_hi - e_lo); each term is
// orthogonal to the all-ones vector, hence so is the sum.
inline Eigen::VectorXd nll_gradient(const Eigen::VectorXd& theta,
                                    const Graph& g, const ComparisonData& data,
                                    const WeightVector& w) {
  detail::check_mle_args(g, data, w);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(g.num_vertices());
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto [lo, hi] = g.edge(e);
    const double r = w(e) * (sigmoid(theta(hi) - theta(lo)) - (1.0 - data.y(e)));
    grad(hi) += r;
    grad(lo) -= r;
  }
  return grad;
}

// z_e = e^diff / (1 + e^diff)^2, the Bernoulli variance factor.
inline double z_factor(double diff) {
  const double s = sigmoid(diff);
  return s * (1.0 - s);
}

// Per-edge Hessian weights w_e * z_e(theta).
inline WeightVector hessian_weights(const Eigen::VectorXd& theta,
                                    const Graph& g, const WeightVector& w) {
  detail::check_weights(g, w);
  WeightVector hw(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto [lo, hi] = g.edge(e);
    hw(e) = w(e) * z_factor(theta(hi) - theta(lo));
  }
  return hw;
}

// Hessian of the loss: the weighted Laplacian L_wz.
inline Eigen::MatrixXd hessian_laplacian(const Eigen::VectorXd& theta,
                                         const Graph& g,
                                         const WeightVector& w) {
  return build_laplacian(g, hessian_weights(theta, g, w));
}

enum class SolveMethod { kDampedNewton, kPrecondGd };

struct SolveOptions {
  SolveMethod method = SolveMethod::kDampedNewton;
  double step = 0.5;           // precond_gd step, in (0, 1]
  double grad_tol = 1e-10;
  int max_iters = 5000;
  std::optional<Eigen::VectorXd> theta_init;  // centered start, default 0
  double divergence_bound = 50.0;             // existence-condition tripwire
};

struct MleSolution {
  Eigen::VectorXd theta;
  bool converged = false;
  int iters = 0;
};

// Weighted MLE over the centered hyperplane. The default damped Newton
// recomputes the Hessian each step with Armijo backtracking; precond_gd is
// the fixed-preconditioner iteration theta <- theta - step * L_wz^+ grad
// with L_wz frozen at the starting point.
inline MleSolution solve_mle(const Graph& g, const ComparisonData& data,
                             const WeightVector& w,
                             const SolveOptions& opts = {}) {
  detail::check_mle_args(g, data, w);
  const int n = g.num_vertices();
  if (!is_connected(g, w)) {
    const auto comps = connected_components(g, w);
    std::string msg = "solve_mle: weighted support is disconnected; component {";
    const auto& comp = comps.front();
    for (std::size_t i = 0; i < comp.size() && i < 8; ++i)
      msg += (i ? "," : "") + std::to_string(comp[i]);
    if (comp.size() > 8) msg += ",...";
    msg += "} is isolated from the rest";
    throw DisconnectedError(msg);
  }
  if (!(opts.step > 0) || opts.step > 1.0)
    throw std::invalid_argument("solve_mle: step must be in (0, 1]");
  if (!(opts.grad_tol > 0))
    throw std::invalid_argument("solve_mle: grad_tol must be positive");

  Eigen::VectorXd theta = opts.theta_init ? *opts.theta_init
                                          : Eigen::VectorXd::Zero(n);
  if (theta.size() != n) throw std::invalid_argument("solve_mle: theta_init size");
  theta.array() -= theta.mean();

  const auto diverged = [&](const Eigen::VectorXd& t) {
    return t.cwiseAbs().maxCoeff() > opts.divergence_bound;
  };

  MleSolution out;
  if (opts.method == SolveMethod::kPrecondGd) {
    const LaplacianPinv precond(hessian_laplacian(theta, g, w));
    for (int it = 1; it <= opts.max_iters; ++it) {
      const Eigen::VectorXd grad = nll_gradient(theta, g, data, w);
      if (grad.norm() <= opts.grad_tol) {
        out.converged = true;
        out.iters = it - 1;
        break;
      }
      theta -= opts.step * precond.apply(grad);
      theta.array() -= theta.mean();
      out.iters = it;
      if (diverged(theta))
        throw DivergenceError(
            "solve_mle: iterate escaped (no finite minimizer; some item never "
            "loses across a cut)");
    }
  } else {
    const Eigen::MatrixXd ones_reg =
        Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    double f = nll(theta, g, data, w);
    for (int it = 1; it <= opts.max_iters; ++it) {
      const Eigen::VectorXd grad = nll_gradient(theta, g, data, w);
      if (grad.norm() <= opts.grad_tol) {
        out.converged = true;
        out.iters = it - 1;
        break;
      }
      // L_wz is PD on the centered hyperplane; the rank-one shift makes the
      // full system PD without moving the solution (grad is centered)
      const Eigen::MatrixXd h = hessian_laplacian(theta, g, w) + ones_reg;
      Eigen::VectorXd dir = h.ldlt().solve(grad);
      dir.array() -= dir.mean();
      const double slope = grad.dot(dir);
      double alpha = 1.0;
      bool accepted = false;
      while (alpha > 1e-14) {
        Eigen::VectorXd cand = theta - alpha * dir;
        cand.array() -= cand.mean();
        const double fc = nll(cand, g, data, w);
        if (fc <= f - 1e-4 * alpha * slope) {
          theta = std::move(cand);
          f = fc;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      out.iters = it;
      if (!accepted) break;  // line search stalled at machine precision
      if (diverged(theta))
        throw DivergenceError(
            "solve_mle: iterate escaped (no finite minimizer; some item never "
            "loses across a cut)");
    }
  }
  out.theta = std::move(theta);
  return out;
}

// Indices of the K largest entries, lower index first on ties, ascending.
inline std::vector<int> top_k(const Eigen::VectorXd& theta, int k) {
  const int n = static_cast<int>(theta.size());
  if (k < 1 || k > n) throw std::invalid_argument("top_k: K out of range");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (theta(a) != theta(b)) return theta(a) > theta(b);
    return a < b;
  });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

struct ErrorMetrics {
  double linf = 0;
  double pairwise_linf = 0;
  double topk_accuracy = 0;
};

inline ErrorMetrics error_metrics(const Eigen::VectorXd& theta_hat,
                                  const BTLInstance& b, int k) {
  if (theta_hat.size() != b.theta_star.size())
    throw std::invalid_argument("error_metrics: size mismatch");
  Eigen::VectorXd delta = theta_hat - b.theta_star;
  delta.array() -= delta.mean();
  ErrorMetrics m;
  m.linf = delta.cwiseAbs().maxCoeff();
  m.pairwise_linf = delta.maxCoeff() - delta.minCoeff();
  const auto top_hat = top_k(theta_hat, k);
  const auto top_star = top_k(b.theta_star, k);
  int hits = 0;
  for (int v : top_hat)
    if (std::binary_search(top_star.begin(), top_star.end(), v)) ++hits;
  m.topk_accuracy = static_cast<double>(hits) / k;
  return m;
}

// Error-bound formulas with unit placeholder constants; reported, never
// asserted sharp.
struct BqBounds {
  double b_bound = 0;
  double q_bound = 0;
};

inline BqBounds bq_diagnostics(const Graph& g, const WeightVector& w,
                               double kappa, int reps, double lambda_gap,
                               double c_b = 1.0, double c_q = 1.0) {
  detail::check_weights(g, w);
  if (!(lambda_gap > 0))
    throw std::invalid_argument("bq_diagnostics: lambda_gap must be positive");
  const double n = g.num_vertices();
  const double w_max = w.size() > 0 ? w.maxCoeff() : 0.0;
  const double d_max =
      g.num_edges() > 0 ? weighted_degrees(g, w).maxCoeff() : 0.0;
  const double logn = std::log(n);
  BqBounds out;
  out.b_bound = c_b * kappa * std::sqrt(w_max * logn / (reps * lambda_gap));
  out.q_bound = c_q * std::pow(kappa, 3) * w_max * d_max * d_max * logn * logn /
                (reps * std::pow(lambda_gap, 3));
  return out;
}

// theta CSV: "vertex,theta", 17 significant digits.
inline void write_theta_csv(const std::string& path,
                            const Eigen::VectorXd& theta) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write theta file: " + path);
  out << "vertex,theta\n";
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    out << i << ',' << format_double(theta(i)) << '\n';
  if (!out) throw std::invalid_argument("failed writing theta file: " + path);
}

}  // namespace semirank
