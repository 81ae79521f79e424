#pragma once

#include "semirank/graph.hpp"
#include "semirank/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace semirank {

// Relative cutoff below which eigenvalues count as kernel directions.
inline constexpr double kPinvCutoffRel = 1e-9;

namespace detail {
inline void check_laplacian_like(const Eigen::MatrixXd& L) {
  if (L.rows() != L.cols()) throw std::invalid_argument("matrix must be square");
  const double scale = std::max(1.0, L.cwiseAbs().maxCoeff());
  const double asym = (L - L.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale)
    throw std::invalid_argument("matrix asymmetry beyond tolerance");
}
}  // namespace detail

// Second-smallest eigenvalue (the spectral gap of a Laplacian whose kernel
// contains the all-ones vector). Dense symmetric solve at desk scale.
inline double lambda_n_minus_1(const Eigen::MatrixXd& L) {
  detail::check_laplacian_like(L);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(1);
}

// Eigendecomposition-backed pseudo-inverse of a PSD matrix with small
// eigenvalues (below kPinvCutoffRel * lambda_max) treated as exact zeros.
class LaplacianPinv {
 public:
  explicit LaplacianPinv(const Eigen::MatrixXd& L) {
    detail::check_laplacian_like(L);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    vectors_ = es.eigenvectors();
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double cutoff = kPinvCutoffRel * std::max(ev.cwiseAbs().maxCoeff(), 0.0);
    inv_values_.resize(ev.size());
    kernel_dim_ = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (ev(i) > cutoff) {
        inv_values_(i) = 1.0 / ev(i);
      } else {
        inv_values_(i) = 0.0;
        ++kernel_dim_;
      }
    }
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    return vectors_ * (inv_values_.asDiagonal() * (vectors_.transpose() * v));
  }

  // Kernel dimension 1 means: connected Laplacian (kernel = span{1}).
  int kernel_dim() const { return kernel_dim_; }

 private:
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd inv_values_;
  int kernel_dim_ = 0;
};

inline Eigen::VectorXd laplacian_pinv_apply(const Eigen::MatrixXd& L,
                                            const Eigen::VectorXd& v) {
  if (v.size() != L.rows()) throw std::invalid_argument("pinv_apply: size mismatch");
  return LaplacianPinv(L).apply(v);
}

// Omega_kl = (e_k - e_l)^T L^+ (e_k - e_l). Infinite (error) when k and l
// are in different components.
inline double effective_resistance(const Eigen::MatrixXd& L, int k, int l) {
  if (k == l) throw std::invalid_argument("effective_resistance: k != l required");
  if (k < 0 || l < 0 || k >= L.rows() || l >= L.rows())
    throw std::invalid_argument("effective_resistance: vertex out of range");
  LaplacianPinv pinv(L);
  if (pinv.kernel_dim() > 1)
    throw std::runtime_error("effective_resistance: graph is disconnected");
  Eigen::VectorXd d = Eigen::VectorXd::Zero(L.rows());
  d(k) = 1.0;
  d(l) = -1.0;
  return d.dot(pinv.apply(d));
}

// sum_e w_e | (e_k - e_l)^T L_wz^+ (e_i - e_j) | where L_wz is the Laplacian
// with weights w .* z.
inline double congestion_sum(const Graph& g, const WeightVector& w,
                             const Eigen::VectorXd& z, int k, int l) {
  detail::check_weights(g, w);
  if (z.size() != g.num_edges())
    throw std::invalid_argument("congestion_sum: z size mismatch");
  if (k == l) return 0.0;
  const Eigen::MatrixXd Lwz =
      build_laplacian(g, (w.array() * z.array()).matrix());
  LaplacianPinv pinv(Lwz);
  if (pinv.kernel_dim() > 1)
    throw std::runtime_error("congestion_sum: graph is disconnected");
  Eigen::VectorXd d = Eigen::VectorXd::Zero(g.num_vertices());
  d(k) = 1.0;
  d(l) = -1.0;
  const Eigen::VectorXd v = pinv.apply(d);
  double total = 0.0;
  for (int e = 0; e < g.num_edges(); ++e)
    total += w(e) * std::abs(v(g.edge(e).lo) - v(g.edge(e).hi));
  return total;
}

// <Pi_perp1, U U^T> = tr(U U^T) - ||U^T 1||^2 / n, in O(nk) without forming
// the Gram matrix.
inline double centered_gram_trace(const Eigen::MatrixXd& u) {
  const double n = static_cast<double>(u.rows());
  const Eigen::RowVectorXd colsum = Eigen::RowVectorXd::Ones(u.rows()) * u;
  return u.squaredNorm() - colsum.squaredNorm() / n;
}

// n-by-k sign matrix with entries +-1/sqrt(k), seeded, row-major fill.
inline Eigen::MatrixXd jl_matrix(int n, int k, std::uint64_t seed) {
  if (n < 1 || k < 1) throw std::invalid_argument("jl_matrix: need n, k >= 1");
  const double s = 1.0 / std::sqrt(static_cast<double>(k));
  Eigen::MatrixXd r(n, k);
  SplitMix64 rng(substream(seed, {stream_tag::jl}));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) r(i, j) = rng.coin() ? s : -s;
  return r;
}

// Phi(G) >= lambda_{n-1}(D^{-1/2} L D^{-1/2}) / 2; requires all degrees > 0.
inline double conductance_lower_bound(const Graph& g, const WeightVector& w) {
  const Eigen::VectorXd deg = weighted_degrees(g, w);
  if ((deg.array() <= 0.0).any())
    throw std::runtime_error("conductance_lower_bound: isolated vertex");
  const Eigen::VectorXd dinv_sqrt = deg.array().rsqrt();
  const Eigen::MatrixXd L = build_laplacian(g, w);
  const Eigen::MatrixXd norm_lap =
      dinv_sqrt.asDiagonal() * L * dinv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (norm_lap + norm_lap.transpose()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues()(1);
}

enum class ExpMethod { kAuto, kDense, kLanczos };

// Dense graphs up to this order use the eigendecomposition path; above it
// the matrix-free Lanczos path is the default.
inline constexpr int kExpDenseMaxN = 160;

namespace detail {

// y <- eta * L_w x, no allocation, no dense matrix.
inline void apply_scaled_laplacian(const Graph& g, const WeightVector& w,
                                   double eta, const Eigen::VectorXd& x,
                                   Eigen::VectorXd& y) {
  y.setZero();
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto [i, j] = g.edge(e);
    const double d = w(e) * (x(i) - x(j));
    y(i) += d;
    y(j) -= d;
  }
  y *= eta;
}

// exp(-T_m) e1 * scale for the Lanczos tridiagonal (alpha, beta).
inline Eigen::VectorXd tridiag_exp_e1(const Eigen::VectorXd& alpha,
                                      const Eigen::VectorXd& beta, int m,
                                      double scale) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(alpha.head(m), beta.head(std::max(m - 1, 0)));
  const Eigen::VectorXd weights = es.eigenvectors().row(0).transpose();
  const Eigen::VectorXd decayed =
      (-es.eigenvalues().array()).exp() * weights.array();
  return es.eigenvectors() * (scale * decayed);
}

// One column of exp(-eta L_w) v by adaptive Lanczos with full
// reorthogonalization. Error target delta * ||v||: stop when the projected
// exponential changes by at most delta/10 between successive checkpoints and
// the first-order residual estimate beta_m * |last entry| is below delta/2.
inline Eigen::VectorXd lanczos_exp_column(const Graph& g,
                                          const WeightVector& w, double eta,
                                          const Eigen::VectorXd& v,
                                          double delta) {
  const int n = g.num_vertices();
  const double beta0 = v.norm();
  if (beta0 == 0.0 || eta == 0.0) return v;

  Eigen::MatrixXd q(n, std::min(n, 48));
  Eigen::VectorXd alpha(n), beta(n);
  q.col(0) = v / beta0;
  Eigen::VectorXd work(n);
  Eigen::VectorXd y_prev;
  int m = 0;
  int next_check = 2;
  bool converged = false;
  while (m < n) {
    if (m + 1 > q.cols()) q.conservativeResize(Eigen::NoChange, std::min<Eigen::Index>(n, q.cols() * 2));
    apply_scaled_laplacian(g, w, eta, q.col(m), work);
    alpha(m) = q.col(m).dot(work);
    work -= alpha(m) * q.col(m);
    if (m > 0) work -= beta(m - 1) * q.col(m - 1);
    // full reorthogonalization keeps the recurrence trustworthy at tight delta
    work -= q.leftCols(m + 1) * (q.leftCols(m + 1).transpose() * work);
    const double b = work.norm();
    ++m;
    const bool breakdown = b < 1e-14 * beta0;
    if (m == next_check || breakdown || m == n) {
      next_check = m + std::max(2, m / 4);
      Eigen::VectorXd y = tridiag_exp_e1(alpha, beta, m, beta0);
      if (breakdown) {
        // invariant subspace: the projected result is exact
        y_prev = y;
        converged = true;
        break;
      }
      const double resid = b * std::abs(y(m - 1));
      double diff = std::numeric_limits<double>::infinity();
      if (y_prev.size() > 0) {
        Eigen::VectorXd ext = y;
        ext.conservativeResize(m);
        Eigen::VectorXd prev_ext = Eigen::VectorXd::Zero(m);
        prev_ext.head(y_prev.size()) = y_prev;
        diff = (ext - prev_ext).norm();
      }
      y_prev = y;
      if (diff <= delta / 10.0 * beta0 && resid <= delta / 2.0 * beta0) {
        converged = true;
        break;
      }
      if (m == n) {
        // full Krylov space reached: the projection is exact in exact
        // arithmetic; trust it unless the residual estimate disagrees
        if (resid <= delta * beta0) converged = true;
        break;
      }
    }
    if (m < n) {
      beta(m - 1) = b;
      q.col(m) = work / b;
    }
  }
  if (!converged)
    throw std::runtime_error("exp_action: Lanczos residual above tolerance at full dimension");
  return q.leftCols(y_prev.size()) * y_prev;
}

}  // namespace detail

// Columnwise action of the heat kernel: column c of the result approximates
// exp(-eta L_w) V0[:,c] with 2-norm error at most delta * ||V0[:,c]||.
inline Eigen::MatrixXd exp_action(const Graph& g, const WeightVector& w,
                                  double eta, const Eigen::MatrixXd& v0,
                                  double delta,
                                  ExpMethod method = ExpMethod::kAuto) {
  detail::check_weights(g, w);
  if (!(eta >= 0) || !std::isfinite(eta))
    throw std::invalid_argument("exp_action: eta must be finite and >= 0");
  if (!(delta > 0)) throw std::invalid_argument("exp_action: delta must be > 0");
  if (v0.rows() != g.num_vertices())
    throw std::invalid_argument("exp_action: V0 row count mismatch");
  if (!((w.array() * eta).isFinite().all()))
    throw std::invalid_argument("exp_action: eta * w not finite");
  if (eta == 0.0) return v0;
  if (method == ExpMethod::kAuto)
    method = g.num_vertices() <= kExpDenseMaxN ? ExpMethod::kDense
                                               : ExpMethod::kLanczos;
  if (method == ExpMethod::kDense) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_laplacian(g, w));
    const Eigen::VectorXd decay = (-eta * es.eigenvalues().array()).exp();
    return es.eigenvectors() *
           (decay.asDiagonal() * (es.eigenvectors().transpose() * v0));
  }
  Eigen::MatrixXd u(v0.rows(), v0.cols());
  for (Eigen::Index c = 0; c < v0.cols(); ++c)
    u.col(c) = detail::lanczos_exp_column(g, w, eta, v0.col(c), delta);
  return u;
}

// Flat summary of the spectral quantities steering the reweighting analysis.
struct SpectralReport {
  double lambda_gap = 0;
  double d_max = 0;
  double d_min = 0;
  double w_max = 0;
  double conductance_lb = 0;
  bool connected = false;
};

inline SpectralReport spectral_report(const Graph& g, const WeightVector& w) {
  detail::check_weights(g, w);
  SpectralReport r;
  const Eigen::VectorXd deg = weighted_degrees(g, w);
  r.d_max = deg.size() > 0 ? deg.maxCoeff() : 0.0;
  r.d_min = deg.size() > 0 ? deg.minCoeff() : 0.0;
  r.w_max = w.size() > 0 ? w.maxCoeff() : 0.0;
  r.lambda_gap = lambda_n_minus_1(build_laplacian(g, w));
  r.connected = is_connected(g, w);
  r.conductance_lb = r.d_min > 0
                         ? conductance_lower_bound(g, w)
                         : std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace semirank
