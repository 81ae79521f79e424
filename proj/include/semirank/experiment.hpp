#pragma once

#include "semirank/io.hpp"
#include "semirank/mle.hpp"
#include "semirank/mmwu.hpp"
#include "semirank/parallel.hpp"
#include "semirank/sampling.hpp"

#include <chrono>
#include <map>
#include <ostream>

namespace semirank {

enum class AdversaryKind { kNone, kClique, kCluster };

struct ClusterParams {
  std::vector<int> sizes;
  std::vector<double> p_within;
  double q = 0.2;
};

struct ExperimentConfig {
  int n = 200;
  int k_top = 10;
  int reps = 10;  // L
  double p = 0.25;
  std::vector<double> delta_grid;  // empty: 31 points over [0.02, 0.62]
  int trials = 50;
  double eps = 0.25;
  std::uint64_t seed = 0;
  AdversaryKind adversary = AdversaryKind::kClique;
  ClusterParams cluster;
  std::vector<std::string> methods = {"vanilla_er", "weighted_sr"};
  // solver knobs for the reweighting step
  int jl_dim = 16;
  double exp_delta = 1e-4;
  OracleKind oracle = OracleKind::kGreedy;
  // cluster experiment
  std::vector<double> q_grid;
  double cluster_delta_k = 0.5;
  int threads = 0;      // 0: SEMIRANK_THREADS or hardware
  bool timing = false;  // real wall_ms values break byte-reproducibility

  std::vector<double> resolved_delta_grid() const {
    if (!delta_grid.empty()) return delta_grid;
    std::vector<double> grid(31);
    for (int i = 0; i < 31; ++i) grid[static_cast<std::size_t>(i)] = 0.02 + i * 0.02;
    return grid;
  }

  void validate() const {
    if (n < 2) throw std::invalid_argument("config: n >= 2 required");
    if (k_top < 1 || k_top >= n) throw std::invalid_argument("config: K out of range");
    if (reps < 1) throw std::invalid_argument("config: L >= 1 required");
    if (!(p > 0) || p > 1) throw std::invalid_argument("config: p in (0,1] required");
    if (trials < 1) throw std::invalid_argument("config: trials >= 1 required");
    const auto grid = resolved_delta_grid();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!(grid[i] > 0)) throw std::invalid_argument("config: delta grid must be positive");
      if (i > 0 && !(grid[i] > grid[i - 1]))
        throw std::invalid_argument("config: delta grid must be strictly increasing");
    }
    if (methods.empty()) throw std::invalid_argument("config: no methods selected");
    for (const auto& m : methods)
      if (m != "vanilla_er" && m != "vanilla_sr" && m != "weighted_sr")
        throw std::invalid_argument("config: unknown method " + m);
    if (adversary == AdversaryKind::kCluster) {
      int total = 0;
      for (int s : cluster.sizes) total += s;
      if (total != n)
        throw std::invalid_argument("config: cluster sizes must sum to n");
    }
  }
};

struct TrialRecord {
  double sweep_value = 0;  // delta_k for the top-K sweep, q for the cluster study
  int trial = 0;
  std::string method;
  double topk_accuracy = 0;
  double linf = 0;
  double pairwise_linf = 0;
  double lambda_gap = 0;
  double d_max = 0;
  double wall_ms = 0;
  bool failed = false;
};

inline void write_trial_csv(std::ostream& out,
                            const std::vector<TrialRecord>& records,
                            const std::string& sweep_column = "delta_k") {
  out << sweep_column
      << ",trial,method,topk_accuracy,linf,pairwise_linf,lambda_gap,d_max,wall_ms\n";
  const auto num = [](double v) { return format_double(v); };
  for (const auto& r : records) {
    out << num(r.sweep_value) << ',' << r.trial << ',' << r.method << ','
        << num(r.topk_accuracy) << ',' << num(r.linf) << ','
        << num(r.pairwise_linf) << ',' << num(r.lambda_gap) << ','
        << num(r.d_max) << ',' << num(r.wall_ms) << '\n';
  }
}

namespace detail {

struct TimedScope {
  explicit TimedScope(bool enabled) : enabled_(enabled) {
    if (enabled_) start_ = std::chrono::steady_clock::now();
  }
  double ms() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

inline TrialRecord failed_record(double sweep, int trial, std::string method) {
  TrialRecord r;
  r.sweep_value = sweep;
  r.trial = trial;
  r.method = std::move(method);
  r.failed = true;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.topk_accuracy = r.linf = r.pairwise_linf = r.lambda_gap = r.d_max = nan;
  return r;
}

inline ComparisonData restrict_to_mask(const ComparisonData& data,
                                       const std::vector<std::uint8_t>& mask) {
  ComparisonData out;
  out.reps = data.reps;
  std::vector<double> kept;
  for (Eigen::Index e = 0; e < data.y.size(); ++e)
    if (mask[static_cast<std::size_t>(e)]) kept.push_back(data.y(e));
  out.y = Eigen::Map<Eigen::VectorXd>(kept.data(), static_cast<Eigen::Index>(kept.size()));
  return out;
}

}  // namespace detail

// Appendix-style top-K sweep. Per trial, one comparison-RNG substream and
// one graph are shared across the whole delta grid (common random numbers;
// the reweighting depends only on the graph, so it is computed once per
// trial). The record stream is sorted by (delta_k, trial, method) and is
// identical for any worker count.
inline std::vector<TrialRecord> run_topk_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto grid = cfg.resolved_delta_grid();
  const bool want_er = std::count(cfg.methods.begin(), cfg.methods.end(), "vanilla_er") > 0;
  const bool want_sr = std::count(cfg.methods.begin(), cfg.methods.end(), "vanilla_sr") > 0;
  const bool want_weighted =
      std::count(cfg.methods.begin(), cfg.methods.end(), "weighted_sr") > 0;

  std::vector<std::vector<TrialRecord>> per_trial(static_cast<std::size_t>(cfg.trials));
  parallel_for_index(
      cfg.trials,
      [&](std::int64_t trial) {
        auto& out = per_trial[static_cast<std::size_t>(trial)];
        const auto t64 = static_cast<std::uint64_t>(trial);
        const std::uint64_t graph_seed = substream(cfg.seed, {1, t64});
        const std::uint64_t adv_seed = substream(cfg.seed, {2, t64});
        const std::uint64_t data_seed = substream(cfg.seed, {3, t64});
        const std::uint64_t mmwu_seed = substream(cfg.seed, {4, t64});

        Graph g_sr;
        double nominal_p = cfg.p;
        switch (cfg.adversary) {
          case AdversaryKind::kNone:
            g_sr = gen_er(cfg.n, cfg.p, graph_seed);
            break;
          case AdversaryKind::kClique:
            g_sr = apply_clique_adversary(gen_er(cfg.n, cfg.p, graph_seed), adv_seed);
            break;
          case AdversaryKind::kCluster:
            g_sr = gen_cluster_graph(cfg.cluster.sizes, cfg.cluster.p_within,
                                     cfg.cluster.q, graph_seed);
            nominal_p = cfg.cluster.q;
            break;
        }
        const WeightVector ones_sr = WeightVector::Ones(g_sr.num_edges());

        Graph g_er;
        WeightVector ones_er;
        double er_gap = 0, er_dmax = 0;
        if (want_er) {
          g_er = g_sr.er_subgraph();
          ones_er = WeightVector::Ones(g_er.num_edges());
          er_gap = lambda_n_minus_1(build_laplacian(g_er, ones_er));
          er_dmax = g_er.num_edges() > 0
                        ? weighted_degrees(g_er, ones_er).maxCoeff()
                        : 0.0;
        }
        double sr_gap = 0, sr_dmax = 0;
        if (want_sr) {
          sr_gap = lambda_n_minus_1(build_laplacian(g_sr, ones_sr));
          sr_dmax = weighted_degrees(g_sr, ones_sr).maxCoeff();
        }

        std::optional<ReweightReport> reweight_report;
        std::string reweight_error;
        if (want_weighted) {
          MMWUParams params;
          params.eps = cfg.eps;
          params.p = nominal_p;
          params.jl_dim = cfg.jl_dim;
          params.exp_delta = cfg.exp_delta;
          params.oracle = cfg.oracle;
          params.seed = mmwu_seed;
          try {
            reweight_report = reweight(g_sr, params);
          } catch (const std::exception& ex) {
            reweight_error = ex.what();
          }
        }

        for (double delta : grid) {
          const BTLInstance scores = gen_btl_scores(cfg.n, cfg.k_top, delta);
          const ComparisonData data = sample_comparisons(g_sr, scores, cfg.reps, data_seed);
          auto run_method = [&](const std::string& method, const Graph& graph,
                                const ComparisonData& d, const WeightVector& w,
                                double gap, double dmax) {
            detail::TimedScope timer(cfg.timing);
            TrialRecord r;
            r.sweep_value = delta;
            r.trial = static_cast<int>(trial);
            r.method = method;
            try {
              const MleSolution sol = solve_mle(graph, d, w);
              if (!sol.converged)
                throw SolverError("solver hit iteration limit");
              const ErrorMetrics m = error_metrics(sol.theta, scores, cfg.k_top);
              r.topk_accuracy = m.topk_accuracy;
              r.linf = m.linf;
              r.pairwise_linf = m.pairwise_linf;
              r.lambda_gap = gap;
              r.d_max = dmax;
            } catch (const std::exception&) {
              r = detail::failed_record(delta, static_cast<int>(trial), method);
            }
            r.wall_ms = timer.ms();
            out.push_back(std::move(r));
          };

          for (const auto& method : cfg.methods) {
            if (method == "vanilla_er") {
              const ComparisonData data_er =
                  detail::restrict_to_mask(data, g_sr.er_mask());
              run_method("vanilla_er", g_er, data_er, ones_er, er_gap, er_dmax);
            } else if (method == "vanilla_sr") {
              run_method("vanilla_sr", g_sr, data, ones_sr, sr_gap, sr_dmax);
            } else {
              if (!reweight_report) {
                out.push_back(detail::failed_record(delta, static_cast<int>(trial),
                                                    "weighted_sr"));
                continue;
              }
              const double gap = reweight_report->lambda_gap;
              const double dmax =
                  g_sr.num_edges() > 0
                      ? weighted_degrees(g_sr, reweight_report->w_out).maxCoeff()
                      : 0.0;
              run_method("weighted_sr", g_sr, data, reweight_report->w_out, gap,
                         dmax);
            }
          }
        }
      },
      cfg.threads);

  std::vector<TrialRecord> records;
  for (auto& v : per_trial)
    for (auto& r : v) records.push_back(std::move(r));
  std::sort(records.begin(), records.end(),
            [](const TrialRecord& a, const TrialRecord& b) {
              if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
              if (a.trial != b.trial) return a.trial < b.trial;
              return a.method < b.method;
            });
  return records;
}

// Cluster study: unweighted MLE on the cluster-sampled graph across a
// q-grid. One uniform draw per pair is shared across the grid, so the
// hidden ER subgraphs are nested in q.
inline std::vector<TrialRecord> run_cluster_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.q_grid.empty())
    throw std::invalid_argument("config: cluster experiment needs q_grid");
  int total = 0;
  for (int s : cfg.cluster.sizes) total += s;
  if (total != cfg.n) throw std::invalid_argument("config: cluster sizes must sum to n");
  for (double q : cfg.q_grid) {
    if (!(q > 0) || q > 1) throw std::invalid_argument("config: q_grid entries in (0,1]");
    for (double pt : cfg.cluster.p_within)
      if (q > pt) throw std::invalid_argument("config: q_grid must stay below p_within");
  }

  const BTLInstance scores = gen_btl_scores(cfg.n, cfg.k_top, cfg.cluster_delta_k);
  const std::int64_t tasks = static_cast<std::int64_t>(cfg.q_grid.size()) * cfg.trials;
  std::vector<TrialRecord> records(static_cast<std::size_t>(tasks));
  parallel_for_index(
      tasks,
      [&](std::int64_t idx) {
        const int qi = static_cast<int>(idx / cfg.trials);
        const int trial = static_cast<int>(idx % cfg.trials);
        const double q = cfg.q_grid[static_cast<std::size_t>(qi)];
        const auto t64 = static_cast<std::uint64_t>(trial);
        const Graph g = gen_cluster_graph(cfg.cluster.sizes, cfg.cluster.p_within,
                                          q, substream(cfg.seed, {1, t64}));
        const ComparisonData data =
            sample_comparisons(g, scores, cfg.reps, substream(cfg.seed, {3, t64}));
        const WeightVector ones = WeightVector::Ones(g.num_edges());
        detail::TimedScope timer(cfg.timing);
        TrialRecord r;
        r.sweep_value = q;
        r.trial = trial;
        r.method = "vanilla_sr";
        try {
          const MleSolution sol = solve_mle(g, data, ones);
          if (!sol.converged) throw SolverError("solver hit iteration limit");
          const ErrorMetrics m = error_metrics(sol.theta, scores, cfg.k_top);
          r.topk_accuracy = m.topk_accuracy;
          r.linf = m.linf;
          r.pairwise_linf = m.pairwise_linf;
          r.lambda_gap = lambda_n_minus_1(build_laplacian(g, ones));
          r.d_max = weighted_degrees(g, ones).maxCoeff();
        } catch (const std::exception&) {
          r = detail::failed_record(q, trial, "vanilla_sr");
        }
        r.wall_ms = timer.ms();
        records[static_cast<std::size_t>(idx)] = std::move(r);
      },
      cfg.threads);
  std::sort(records.begin(), records.end(),
            [](const TrialRecord& a, const TrialRecord& b) {
              if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
              if (a.trial != b.trial) return a.trial < b.trial;
              return a.method < b.method;
            });
  return records;
}

// Spectral health check of a (possibly reweighted) comparison graph against
// the targets w_max <= 1, d_max <= 2np, lambda_gap >= gap_factor * np.
struct DiagnoseResult {
  SpectralReport report;
  bool weights_assumed_unit = false;
  double p = 0;
  double gap_factor = 0.5;
  bool pass_w_max = false;
  bool pass_d_max = false;
  bool pass_gap = false;
  bool pass_connected = false;

  bool all_pass() const {
    return pass_w_max && pass_d_max && pass_gap && pass_connected;
  }
};

inline DiagnoseResult diagnose(const Graph& g, const WeightVector* weights,
                               double p, double gap_factor = 0.5) {
  if (!(p > 0) || p > 1) throw std::invalid_argument("diagnose: p in (0,1] required");
  DiagnoseResult r;
  WeightVector w;
  if (weights) {
    w = *weights;
  } else {
    w = WeightVector::Ones(g.num_edges());
    r.weights_assumed_unit = true;
  }
  r.report = spectral_report(g, w);
  r.p = p;
  r.gap_factor = gap_factor;
  const double np = p * g.num_vertices();
  r.pass_w_max = r.report.w_max <= 1.0 + 1e-9;
  r.pass_d_max = r.report.d_max <= 2.0 * np + 1e-9;
  r.pass_gap = r.report.lambda_gap >= gap_factor * np - 1e-9;
  r.pass_connected = r.report.connected;
  return r;
}

inline void print_diagnose(std::ostream& out, const DiagnoseResult& r) {
  const auto line = [&](const std::string& k, const std::string& v) {
    out << k << "=" << v << "\n";
  };
  line("lambda_gap", format_double(r.report.lambda_gap));
  line("d_max", format_double(r.report.d_max));
  line("d_min", format_double(r.report.d_min));
  line("w_max", format_double(r.report.w_max));
  line("conductance_lb", format_double(r.report.conductance_lb));
  line("connected", r.report.connected ? "true" : "false");
  if (r.weights_assumed_unit) line("weights", "unit (no weights supplied)");
  out << "check w_max<=1: " << (r.pass_w_max ? "PASS" : "FAIL") << "\n";
  out << "check d_max<=2np: " << (r.pass_d_max ? "PASS" : "FAIL") << "\n";
  out << "check lambda_gap>=" << format_double(r.gap_factor)
      << "*np: " << (r.pass_gap ? "PASS" : "FAIL") << "\n";
  out << "check connected: " << (r.pass_connected ? "PASS" : "FAIL") << "\n";
}

}  // namespace semirank
