// blockprox - command-line harness for the decentralized optimization library
//
// Subcommands:
//   run        execute a benchmark config (traces + manifest + summary)
//   comm-check print formula vs Monte-Carlo communication means for a topology
//   prox-check run the prox-vs-oracle property suite
//   reference  solve one instance centrally and print H* with its tolerance

#include <CLI11.hpp>
#include <cinttypes>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "blockprox/commsim.hpp"
#include "blockprox/config.hpp"
#include "blockprox/experiments.hpp"
#include "blockprox/oracle.hpp"

namespace {

using namespace blockprox;

// Collects only the flags the user actually passed, so they override file
// values without clobbering defaults.
struct Overrides {
  std::vector<std::pair<std::string, std::string>> entries;

  void add_option(CLI::App* app, const std::string& flag,
                  const std::string& key, const std::string& help) {
    auto value = std::make_shared<std::string>();
    app->add_option(flag, *value, help)->each([this, key, value](
                                                  const std::string& v) {
      *value = v;
      entries.emplace_back(key, v);
    });
  }
};

int cmd_run(const std::string& config_path, const Overrides& overrides) {
  RunConfig cfg = parse_config(config_path, overrides.entries);
  BenchmarkSummary summary = run_benchmark(cfg);
  std::printf("wrote %d repeats x %zu algorithms to %s\n", cfg.repeats,
              cfg.algorithms.size(), cfg.out_dir.c_str());
  for (std::size_t a = 0; a < cfg.algorithms.size(); ++a)
    std::printf("%-11s mean final gap %.6g (std %.6g), %.4f units/iteration\n",
                algorithm_name(cfg.algorithms[a]), summary.mean_final_gap[a],
                summary.std_final_gap[a],
                summary.mean_units_per_iteration[a]);
  return 0;
}

int cmd_comm_check(const std::string& topology_path, const std::string& format,
                   long trials, std::uint64_t seed) {
  Hypergraph h;
  if (format == "graph") {
    h = hypergraph_from_graph(load_graph_file(topology_path));
  } else if (format == "hypergraph") {
    h = load_hypergraph_file(topology_path);
  } else {
    std::fprintf(stderr, "comm-check: format must be graph|hypergraph\n");
    return 2;
  }
  double formula = expected_comm_per_iteration(h);
  Rng rng = make_stream(seed, 0, stream::mc_comm);
  double empirical = monte_carlo_comm(h, trials, rng);
  std::printf("nodes %d, components %d\n", h.n, h.component_count());
  std::printf("expected units/iteration (formula):   %.6f\n", formula);
  std::printf("empirical units/iteration (%ld draws): %.6f\n", trials,
              empirical);
  for (int i = 0; i < h.n; ++i)
    std::printf("node %d communicates with probability %.6f\n", i,
                node_comm_probability(h, i));
  return 0;
}

int cmd_prox_check(int probes, std::uint64_t seed, double tol) {
  Rng rng = make_stream(seed, 0, stream::probe);
  int failures = 0;
  double worst_argmin = 0.0, worst_nonexpansive = 0.0;
  for (int p = 0; p < probes; ++p) {
    int d = 1 + static_cast<int>(rng.bounded(5));
    RegVariant variant = (p % 2 == 0) ? RegVariant::l2 : RegVariant::l1;
    double t = 2.0 * rng.uniform01();
    Eigen::VectorXd zi(d), zj(d), yi(d), yj(d);
    for (int k = 0; k < d; ++k) {
      zi[k] = 3.0 * rng.normal();
      zj[k] = 3.0 * rng.normal();
      yi[k] = 3.0 * rng.normal();
      yj[k] = 3.0 * rng.normal();
    }

    auto [xi, xj] = (variant == RegVariant::l2) ? prox_edge_l2(zi, zj, t)
                                                : prox_edge_l1(zi, zj, t);
    auto [oi, oj] = numeric_edge_prox(zi, zj, t, variant);
    double err = std::max((xi - oi).norm(), (xj - oj).norm());
    worst_argmin = std::max(worst_argmin, err);
    if (err > tol) ++failures;

    // Nonexpansive inequality of the prox against a random anchor (y_i,
    // y_j), with beta = t and lambda = 1.
    auto norm_val = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
      return variant == RegVariant::l2 ? (a - b).norm()
                                       : (a - b).lpNorm<1>();
    };
    double lhs = (xi - yi).squaredNorm() + (xj - yj).squaredNorm();
    double rhs = (zi - yi).squaredNorm() + (zj - yj).squaredNorm() -
                 2.0 * t * (norm_val(xi, xj) - norm_val(yi, yj));
    double violation = lhs - rhs;
    worst_nonexpansive = std::max(worst_nonexpansive, violation);
    if (violation > 1e-10) ++failures;
  }
  std::printf("prox-check: %d probes, worst argmin error %.3g, worst "
              "nonexpansive violation %.3g\n",
              probes, worst_argmin, worst_nonexpansive);
  std::printf("%s\n", failures == 0 ? "PASS" : "FAIL");
  return failures == 0 ? 0 : 1;
}

int cmd_reference(const std::string& config_path, const Overrides& overrides) {
  RunConfig cfg = parse_config(config_path, overrides.entries);
  std::uint64_t instance_seed = derive_seed(cfg.seed, 0, stream::instance);
  Instance inst = build_instance(cfg, instance_seed);
  ReferenceSolution ref = reference_solve(inst.problem, cfg.ref_iters,
                                          cfg.ref_tol);
  std::printf("instance: n=%d d=%d m=%d digest=%s\n", inst.problem.n,
              inst.problem.d, inst.problem.component_count(),
              inst.digest.c_str());
  std::printf("H* = %.12g (self-consistency drift %.3g, subgradient budget "
              "%ld)\n",
              ref.h_star, ref.tol_achieved, ref.subgradient_iterations);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decentralized optimization with randomized local coordination"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides run_overrides;
  CLI::App* run_cmd = app.add_subcommand("run", "execute a benchmark config");
  run_cmd->add_option("--config", config_path, "flat key = value config file");
  run_overrides.add_option(run_cmd, "--setting", "setting",
                           "sbm_i|sbm_ii|sbm_iii|custom");
  run_overrides.add_option(run_cmd, "--data-file", "data_file", "data CSV");
  run_overrides.add_option(run_cmd, "--graph-file", "graph_file",
                           "topology file");
  run_overrides.add_option(run_cmd, "--algorithms", "algorithms",
                           "comma list: randomedge,blockprox,admm,proxavg,dsgd,walkman");
  run_overrides.add_option(run_cmd, "--lambda", "lambda", "regularizer weight");
  run_overrides.add_option(run_cmd, "--variant", "variant", "l2|l1");
  run_overrides.add_option(run_cmd, "--budget", "budget", "unit budget");
  run_overrides.add_option(run_cmd, "--max-iters", "max_iters",
                           "iteration stop rule (overrides budget when > 0)");
  run_overrides.add_option(run_cmd, "--repeats", "repeats", "repeat count");
  run_overrides.add_option(run_cmd, "--seed", "seed", "master seed");
  run_overrides.add_option(run_cmd, "--out", "out_dir", "output directory");
  run_overrides.add_option(run_cmd, "--eval-stride", "eval_stride",
                           "objective evaluation stride");
  run_overrides.add_option(run_cmd, "--ref-iters", "ref_iters",
                           "reference subgradient budget");
  run_overrides.add_option(run_cmd, "--ref-tol", "ref_tol",
                           "reference relative tolerance");
  run_overrides.add_option(run_cmd, "--sigma", "sigma", "noise scale");
  run_overrides.add_option(run_cmd, "--tau", "tau", "ridge term");
  run_overrides.add_option(run_cmd, "--alpha0", "alpha0",
                           "randomedge/blockprox step scale");
  run_overrides.add_option(run_cmd, "--rho", "rho", "admm penalty or 'auto'");
  run_overrides.add_option(run_cmd, "--dsgd-step", "dsgd_step",
                           "dsgd/proxavg step size");
  run_overrides.add_option(run_cmd, "--walkman-beta", "walkman_beta",
                           "walkman penalty");
  run_overrides.add_option(run_cmd, "--jobs", "jobs",
                           "parallel repeat workers (env BLOCKPROX_JOBS)");
  run_overrides.add_option(run_cmd, "--shared-instance", "shared_instance",
                           "true|false");

  std::string topology_path, topology_format = "graph";
  long trials = 100000;
  std::uint64_t cc_seed = 1;
  CLI::App* cc_cmd = app.add_subcommand(
      "comm-check", "formula vs Monte-Carlo communication means");
  cc_cmd->add_option("--topology", topology_path, "topology file")->required();
  cc_cmd->add_option("--format", topology_format, "graph|hypergraph");
  cc_cmd->add_option("--trials", trials, "Monte-Carlo iterations");
  cc_cmd->add_option("--seed", cc_seed, "stream seed");

  int probes = 100;
  std::uint64_t pc_seed = 1;
  double pc_tol = 1e-6;
  CLI::App* pc_cmd =
      app.add_subcommand("prox-check", "prox kernels vs numeric argmin oracle");
  pc_cmd->add_option("--probes", probes, "random probes");
  pc_cmd->add_option("--seed", pc_seed, "stream seed");
  pc_cmd->add_option("--tol", pc_tol, "argmin agreement tolerance");

  std::string ref_config_path;
  Overrides ref_overrides;
  CLI::App* ref_cmd = app.add_subcommand(
      "reference", "centralized solve; prints H* and its tolerance");
  ref_cmd->add_option("--config", ref_config_path, "config file");
  ref_overrides.add_option(ref_cmd, "--setting", "setting",
                           "sbm_i|sbm_ii|sbm_iii|custom");
  ref_overrides.add_option(ref_cmd, "--data-file", "data_file", "data CSV");
  ref_overrides.add_option(ref_cmd, "--graph-file", "graph_file",
                           "topology file");
  ref_overrides.add_option(ref_cmd, "--lambda", "lambda", "regularizer weight");
  ref_overrides.add_option(ref_cmd, "--variant", "variant", "l2|l1");
  ref_overrides.add_option(ref_cmd, "--seed", "seed", "master seed");
  ref_overrides.add_option(ref_cmd, "--tau", "tau", "ridge term");
  ref_overrides.add_option(ref_cmd, "--sigma", "sigma", "noise scale");
  ref_overrides.add_option(ref_cmd, "--ref-iters", "ref_iters",
                           "subgradient budget");
  ref_overrides.add_option(ref_cmd, "--ref-tol", "ref_tol",
                           "relative tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, run_overrides);
    if (cc_cmd->parsed())
      return cmd_comm_check(topology_path, topology_format, trials, cc_seed);
    if (pc_cmd->parsed()) return cmd_prox_check(probes, pc_seed, pc_tol);
    if (ref_cmd->parsed()) return cmd_reference(ref_config_path, ref_overrides);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
