#include "semirank/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

using nlohmann::json;
using namespace semirank;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;

AdversaryKind parse_adversary(const std::string& s) {
  if (s == "none") return AdversaryKind::kNone;
  if (s == "clique") return AdversaryKind::kClique;
  if (s == "cluster") return AdversaryKind::kCluster;
  throw std::invalid_argument("unknown adversary: " + s);
}

OracleKind parse_oracle(const std::string& s) {
  if (s == "greedy") return OracleKind::kGreedy;
  if (s == "lp") return OracleKind::kLp;
  throw std::invalid_argument("unknown oracle: " + s);
}

void load_config_file(const std::string& path, ExperimentConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw std::invalid_argument("config parse error: " + std::string(ex.what()));
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "n") cfg.n = value.get<int>();
    else if (key == "K") cfg.k_top = value.get<int>();
    else if (key == "L") cfg.reps = value.get<int>();
    else if (key == "p") cfg.p = value.get<double>();
    else if (key == "delta_grid") cfg.delta_grid = value.get<std::vector<double>>();
    else if (key == "trials") cfg.trials = value.get<int>();
    else if (key == "eps") cfg.eps = value.get<double>();
    else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
    else if (key == "adversary") cfg.adversary = parse_adversary(value.get<std::string>());
    else if (key == "cluster_sizes") cfg.cluster.sizes = value.get<std::vector<int>>();
    else if (key == "cluster_p_within") cfg.cluster.p_within = value.get<std::vector<double>>();
    else if (key == "cluster_q") cfg.cluster.q = value.get<double>();
    else if (key == "methods") cfg.methods = value.get<std::vector<std::string>>();
    else if (key == "jl_k") cfg.jl_dim = value.get<int>();
    else if (key == "exp_delta") cfg.exp_delta = value.get<double>();
    else if (key == "oracle") cfg.oracle = parse_oracle(value.get<std::string>());
    else if (key == "q_grid") cfg.q_grid = value.get<std::vector<double>>();
    else if (key == "cluster_delta_k") cfg.cluster_delta_k = value.get<double>();
    else if (key == "threads") cfg.threads = value.get<int>();
    else if (key == "timing") cfg.timing = value.get<bool>();
    else throw std::invalid_argument("config: unknown key \"" + key + "\"");
  }
}

struct CliState {
  bool quiet = false;
  std::ostream& info() {
    static std::ofstream devnull;
    return quiet ? static_cast<std::ostream&>(devnull) : std::cout;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"semirank: spectral reweighting and weighted MLE for top-K "
               "ranking on adversarially augmented comparison graphs"};
  app.require_subcommand(1);
  CliState state;
  app.add_flag("--quiet", state.quiet, "suppress informational output");

  // generate
  auto* gen = app.add_subcommand("generate", "generate a comparison graph");
  int gen_n = 60;
  double gen_p = 0.25, gen_q = 0.2;
  std::uint64_t gen_seed = 0;
  std::string gen_adversary = "none", gen_out;
  std::vector<int> gen_sizes;
  std::vector<double> gen_pwithin;
  gen->add_option("--n", gen_n, "vertex count");
  gen->add_option("--p", gen_p, "edge probability of the random base graph");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--adversary", gen_adversary, "none|clique|cluster");
  gen->add_option("--sizes", gen_sizes, "cluster sizes")->delimiter(',');
  gen->add_option("--p-within", gen_pwithin, "within-cluster probabilities")->delimiter(',');
  gen->add_option("--q", gen_q, "cross-cluster probability");
  gen->add_option("--out", gen_out, "output edge-list file")->required();

  // sample
  auto* smp = app.add_subcommand("sample", "sample BTL comparison outcomes");
  std::string smp_graph, smp_out;
  int smp_k = 10, smp_reps = 10;
  double smp_delta = 0.5;
  std::uint64_t smp_seed = 0;
  smp->add_option("--graph", smp_graph, "input graph file")->required();
  smp->add_option("--K", smp_k, "number of top items");
  smp->add_option("--delta", smp_delta, "score gap Delta_K");
  smp->add_option("--L", smp_reps, "comparisons per edge");
  smp->add_option("--seed", smp_seed, "random seed");
  smp->add_option("--out", smp_out, "output comparison file")->required();

  // reweight
  auto* rw = app.add_subcommand("reweight", "solve the reweighting SDP");
  std::string rw_graph, rw_out, rw_report, rw_oracle = "greedy";
  double rw_p = 0.25, rw_eps = 0.25, rw_exp_delta = 1e-6;
  int rw_jlk = 0;
  std::uint64_t rw_seed = 0;
  bool rw_timing = false;
  rw->add_option("--graph", rw_graph, "input graph file")->required();
  rw->add_option("--p", rw_p, "nominal edge probability")->required();
  rw->add_option("--eps", rw_eps, "MMWU accuracy parameter");
  rw->add_option("--jl-k", rw_jlk, "sketch width (0: ceil(24 ln n / eps^2))");
  rw->add_option("--oracle", rw_oracle, "greedy|lp");
  rw->add_option("--exp-delta", rw_exp_delta, "matrix-exponential tolerance");
  rw->add_option("--seed", rw_seed, "random seed");
  rw->add_flag("--timing", rw_timing, "include wall time in the report");
  rw->add_option("--out", rw_out, "output weights edge-list file")->required();
  rw->add_option("--report", rw_report, "optional report file");

  // solve
  auto* sv = app.add_subcommand("solve", "weighted MLE for the scores");
  std::string sv_graph, sv_data, sv_weights, sv_out, sv_method = "newton";
  double sv_tol = 1e-10, sv_step = 0.5;
  int sv_iters = 5000;
  sv->add_option("--graph", sv_graph, "input graph file")->required();
  sv->add_option("--data", sv_data, "input comparison file")->required();
  sv->add_option("--weights", sv_weights, "weights edge-list file (default: unit)");
  sv->add_option("--method", sv_method, "newton|pgd");
  sv->add_option("--grad-tol", sv_tol, "gradient norm tolerance");
  sv->add_option("--max-iters", sv_iters, "iteration cap");
  sv->add_option("--step", sv_step, "pgd step size");
  sv->add_option("--out", sv_out, "output theta CSV")->required();

  // experiment
  auto* ex = app.add_subcommand("experiment", "run a trial sweep to CSV");
  std::string ex_config, ex_out, ex_kind = "topk";
  ExperimentConfig cfg;
  bool ex_timing = false;
  std::optional<int> ex_n, ex_trials, ex_threads, ex_jlk;
  std::optional<double> ex_eps;
  std::optional<std::uint64_t> ex_seed;
  ex->add_option("--config", ex_config, "JSON config file");
  ex->add_option("--kind", ex_kind, "topk|cluster");
  ex->add_option("--n", ex_n, "override: vertex count");
  ex->add_option("--trials", ex_trials, "override: trials");
  ex->add_option("--eps", ex_eps, "override: MMWU eps");
  ex->add_option("--seed", ex_seed, "override: seed");
  ex->add_option("--threads", ex_threads, "override: worker count (0=auto)");
  ex->add_option("--jl-k", ex_jlk, "override: sketch width");
  ex->add_flag("--timing", ex_timing, "emit real wall_ms (breaks reproducibility)");
  ex->add_option("--out", ex_out, "output CSV file")->required();

  // diagnose
  auto* dg = app.add_subcommand("diagnose", "spectral report and target checks");
  std::string dg_graph, dg_weights;
  double dg_p = 0.25, dg_factor = 0.5;
  dg->add_option("--graph", dg_graph, "input graph file")->required();
  dg->add_option("--weights", dg_weights, "weights edge-list file");
  dg->add_option("--p", dg_p, "nominal edge probability")->required();
  dg->add_option("--gap-factor", dg_factor, "required lambda_gap / np ratio");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      return app.exit(e);
    }
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen) {
      Graph g;
      const AdversaryKind kind = parse_adversary(gen_adversary);
      if (kind == AdversaryKind::kCluster) {
        g = gen_cluster_graph(gen_sizes, gen_pwithin, gen_q, gen_seed);
      } else {
        g = gen_er(gen_n, gen_p, gen_seed);
        if (kind == AdversaryKind::kClique) g = apply_clique_adversary(g, gen_seed);
      }
      write_graph_file(gen_out, g);
      state.info() << "wrote " << gen_out << " (" << g.num_vertices()
                   << " vertices, " << g.num_edges() << " edges)\n";
      return kExitOk;
    }
    if (*smp) {
      const GraphFile gf = read_graph_file(smp_graph);
      const BTLInstance scores =
          gen_btl_scores(gf.graph.num_vertices(), smp_k, smp_delta);
      const ComparisonData data =
          sample_comparisons(gf.graph, scores, smp_reps, smp_seed);
      write_comparison_file(smp_out, gf.graph, data);
      state.info() << "wrote " << smp_out << "\n";
      return kExitOk;
    }
    if (*rw) {
      const GraphFile gf = read_graph_file(rw_graph);
      MMWUParams params;
      params.eps = rw_eps;
      params.p = rw_p;
      params.jl_dim = rw_jlk;
      params.oracle = parse_oracle(rw_oracle);
      params.seed = rw_seed;
      params.exp_delta = rw_exp_delta;
      ReweightReport report;
      try {
        report = reweight(gf.graph, params);
      } catch (const std::invalid_argument&) {
        throw;
      } catch (const std::exception& ex) {
        std::cerr << "reweight failed: " << ex.what() << "\n";
        return kExitSolver;
      }
      write_graph_file(rw_out, gf.graph, &report.w_out);
      std::ostringstream rep;
      rep << "lambda_gap=" << format_double(report.lambda_gap) << "\n"
          << "feasible=" << (report.feasible ? "true" : "false") << "\n"
          << "iterations=" << report.iterations << "\n"
          << "sketch_dim=" << report.sketch_dim << "\n"
          << "budget=" << report.budget << "\n";
      if (rw_timing) rep << "wall_ms=" << format_double(report.wall_ms) << "\n";
      if (!rw_report.empty()) {
        std::ofstream rf(rw_report);
        rf << rep.str();
      }
      state.info() << rep.str();
      return kExitOk;
    }
    if (*sv) {
      const GraphFile gf = read_graph_file(sv_graph);
      const ComparisonData data = read_comparison_file(sv_data, gf.graph);
      WeightVector w;
      if (!sv_weights.empty()) {
        const GraphFile wf = read_graph_file(sv_weights);
        if (!wf.weights) throw std::invalid_argument("weights file has no weight column");
        if (wf.graph.edges() != gf.graph.edges())
          throw std::invalid_argument("weights file edges do not match graph");
        w = *wf.weights;
      } else if (gf.weights) {
        w = *gf.weights;
      } else {
        w = WeightVector::Ones(gf.graph.num_edges());
        state.info() << "no weights supplied; assuming unit weights\n";
      }
      SolveOptions opts;
      if (sv_method == "pgd") opts.method = SolveMethod::kPrecondGd;
      else if (sv_method != "newton")
        throw std::invalid_argument("unknown method: " + sv_method);
      opts.grad_tol = sv_tol;
      opts.max_iters = sv_iters;
      opts.step = sv_step;
      MleSolution sol;
      try {
        sol = solve_mle(gf.graph, data, w, opts);
      } catch (const SolverError& ex) {
        std::cerr << "solve failed: " << ex.what() << "\n";
        return kExitSolver;
      }
      if (!sol.converged) {
        std::cerr << "solve failed: iteration limit reached\n";
        return kExitSolver;
      }
      write_theta_csv(sv_out, sol.theta);
      state.info() << "wrote " << sv_out << " after " << sol.iters << " steps\n";
      return kExitOk;
    }
    if (*ex) {
      if (!ex_config.empty()) load_config_file(ex_config, cfg);
      if (ex_n) cfg.n = *ex_n;
      if (ex_trials) cfg.trials = *ex_trials;
      if (ex_eps) cfg.eps = *ex_eps;
      if (ex_seed) cfg.seed = *ex_seed;
      if (ex_threads) cfg.threads = *ex_threads;
      if (ex_jlk) cfg.jl_dim = *ex_jlk;
      if (ex_timing) cfg.timing = true;
      std::vector<TrialRecord> records;
      std::string sweep_col = "delta_k";
      if (ex_kind == "topk") {
        records = run_topk_experiment(cfg);
      } else if (ex_kind == "cluster") {
        records = run_cluster_experiment(cfg);
        sweep_col = "q";
      } else {
        throw std::invalid_argument("unknown experiment kind: " + ex_kind);
      }
      std::ofstream out(ex_out);
      if (!out) throw std::invalid_argument("cannot write CSV: " + ex_out);
      write_trial_csv(out, records, sweep_col);
      state.info() << "wrote " << records.size() << " rows to " << ex_out << "\n";
      return kExitOk;
    }
    if (*dg) {
      const GraphFile gf = read_graph_file(dg_graph);
      std::optional<WeightVector> w;
      if (!dg_weights.empty()) {
        const GraphFile wf = read_graph_file(dg_weights);
        if (!wf.weights) throw std::invalid_argument("weights file has no weight column");
        if (wf.graph.edges() != gf.graph.edges())
          throw std::invalid_argument("weights file edges do not match graph");
        w = *wf.weights;
      } else if (gf.weights) {
        w = *gf.weights;
      }
      const DiagnoseResult res = diagnose(gf.graph, w ? &*w : nullptr, dg_p, dg_factor);
      print_diagnose(std::cout, res);
      return kExitOk;
    }
  } catch (const std::invalid_argument& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
