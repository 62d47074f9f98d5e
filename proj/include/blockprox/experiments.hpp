// experiments.hpp - synthetic instance generation, dataset ingestion,
// theory-bound helpers, and the benchmark orchestrator.
#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "blockprox/algorithms.hpp"
#include "blockprox/commsim.hpp"
#include "blockprox/config.hpp"
#include "blockprox/ledger.hpp"
#include "blockprox/objectives.hpp"
#include "blockprox/rng.hpp"
#include "blockprox/stats.hpp"
#include "blockprox/topology.hpp"

namespace blockprox {

struct Instance {
  Graph graph;
  Problem problem;
  double lambda = 0.0;
  RegVariant variant = RegVariant::l2;
  double sigma = 0.0;
  double tau = 0.0;
  std::vector<int> group_of;                  // empty for loaded datasets
  std::vector<Eigen::VectorXd> ground_truth;  // per node; empty when loaded
  std::string digest;
};

namespace detail {

inline void fnv_mix(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < len; ++k) {
    h ^= bytes[k];
    h *= 0x100000001B3ull;
  }
}

inline std::string instance_digest(const Graph& g,
                                   const std::vector<Eigen::MatrixXd>& mats,
                                   const std::vector<Eigen::VectorXd>& rhs) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  fnv_mix(h, &g.n, sizeof(g.n));
  for (const auto& [i, j] : g.edges) {
    fnv_mix(h, &i, sizeof(i));
    fnv_mix(h, &j, sizeof(j));
  }
  for (const auto& a : mats)
    fnv_mix(h, a.data(), sizeof(double) * static_cast<std::size_t>(a.size()));
  for (const auto& b : rhs)
    fnv_mix(h, b.data(), sizeof(double) * static_cast<std::size_t>(b.size()));
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

inline Instance assemble_instance(Graph graph,
                                  std::vector<Eigen::MatrixXd> mats,
                                  std::vector<Eigen::VectorXd> rhs,
                                  double lambda, RegVariant variant,
                                  double tau) {
  Instance inst;
  inst.digest = instance_digest(graph, mats, rhs);
  inst.graph = std::move(graph);
  inst.lambda = lambda;
  inst.variant = variant;
  inst.tau = tau;
  inst.problem.n = inst.graph.n;
  inst.problem.d = static_cast<int>(mats.at(0).cols());
  for (std::size_t i = 0; i < mats.size(); ++i)
    inst.problem.losses.push_back(std::make_shared<LeastSquaresLoss>(
        std::move(mats[i]), std::move(rhs[i]), tau));
  for (const auto& [i, j] : inst.graph.edges)
    inst.problem.components.push_back(std::make_shared<EdgeDiffNorm>(
        i, j, lambda, variant, inst.problem.d));
  inst.problem.check();
  return inst;
}

}  // namespace detail

// Synthetic least-squares benchmark instance. The graph is a stochastic
// block model over the given groups; nodes in a group share a standard
// normal ground truth; features are standard normal with an all-ones bias
// column appended last; b_i = A_i x*_g(i) + sigma * N(0, I).
//
// Streams: graph (seed, 0, graph); group g truth (seed, g, ground_truth);
// node i features (seed, i, data) filled column by column; node i noise
// (seed, i, noise).
inline Instance synth_instance(const std::vector<int>& group_sizes,
                               double p_in, double p_out, int d, int samples,
                               double sigma, double lambda, RegVariant variant,
                               std::uint64_t seed, double tau = 0.0) {
  if (group_sizes.empty())
    throw std::invalid_argument("synth_instance: empty group list");
  if (d < 2)
    throw std::invalid_argument("synth_instance: need d >= 2 (bias column)");
  if (samples < 1) throw std::invalid_argument("synth_instance: samples >= 1");

  Rng graph_rng = make_stream(seed, 0, stream::graph);
  Graph graph = sbm_generate(group_sizes, p_in, p_out, graph_rng);

  std::vector<int> group_of;
  for (std::size_t g = 0; g < group_sizes.size(); ++g)
    group_of.insert(group_of.end(), group_sizes[g], static_cast<int>(g));

  std::vector<Eigen::VectorXd> truths(group_sizes.size());
  for (std::size_t g = 0; g < group_sizes.size(); ++g) {
    Rng rng = make_stream(seed, g, stream::ground_truth);
    truths[g] = Eigen::VectorXd(d);
    for (int k = 0; k < d; ++k) truths[g][k] = rng.normal();
  }

  std::vector<Eigen::MatrixXd> mats(graph.n);
  std::vector<Eigen::VectorXd> rhs(graph.n);
  for (int i = 0; i < graph.n; ++i) {
    Rng data_rng = make_stream(seed, i, stream::data);
    Eigen::MatrixXd a(samples, d);
    for (int c = 0; c < d - 1; ++c)
      for (int r = 0; r < samples; ++r) a(r, c) = data_rng.normal();
    a.col(d - 1).setOnes();
    Rng noise_rng = make_stream(seed, i, stream::noise);
    Eigen::VectorXd eps(samples);
    for (int r = 0; r < samples; ++r) eps[r] = sigma * noise_rng.normal();
    rhs[i] = a * truths[group_of[i]] + eps;
    mats[i] = std::move(a);
  }

  Instance inst = detail::assemble_instance(std::move(graph), std::move(mats),
                                            std::move(rhs), lambda, variant,
                                            tau);
  inst.sigma = sigma;
  inst.group_of = std::move(group_of);
  inst.ground_truth.resize(inst.problem.n);
  for (int i = 0; i < inst.problem.n; ++i)
    inst.ground_truth[i] = truths[inst.group_of[i]];
  return inst;
}

// Writes the per-node data rows (bias column excluded; the loader appends
// it back) next to the topology file.
inline void save_instance(const Instance& inst, const std::string& data_path,
                          const std::string& graph_path) {
  std::string csv = "node_id,y";
  for (int c = 1; c < inst.problem.d; ++c)
    csv += ",x" + std::to_string(c);
  csv += "\n";
  for (int i = 0; i < inst.problem.n; ++i) {
    const auto* ls =
        dynamic_cast<const LeastSquaresLoss*>(inst.problem.losses[i].get());
    if (ls == nullptr)
      throw std::invalid_argument("save_instance: non least-squares loss");
    const Eigen::MatrixXd& a = ls->matrix();
    const Eigen::VectorXd& b = ls->target();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      csv += std::to_string(i) + "," + format_double(b[r]);
      for (Eigen::Index c = 0; c + 1 < a.cols(); ++c)
        csv += "," + format_double(a(r, c));
      csv += "\n";
    }
  }
  write_file_atomic(data_path, csv);
  std::ostringstream graph_text;
  write_graph(graph_text, inst.graph);
  write_file_atomic(graph_path, graph_text.str());
}

// Generic dataset loader: CSV with a header row "node_id,y,<features...>",
// rows grouped into per-node least-squares losses, bias column appended.
inline Instance load_dataset(const std::string& features_file,
                             const std::string& graph_file, double lambda,
                             RegVariant variant, double tau = 0.0) {
  Graph graph = load_graph_file(graph_file);

  std::ifstream f(features_file);
  if (!f) throw std::runtime_error("cannot open data file: " + features_file);
  std::string header;
  if (!std::getline(f, header))
    throw std::runtime_error("data file: missing header row");
  int columns = 1;
  for (char ch : header)
    if (ch == ',') ++columns;
  if (columns < 2)
    throw std::runtime_error("data file: need node_id, target, features");
  int n_features = columns - 2;

  std::vector<std::vector<double>> ys(graph.n);
  std::vector<std::vector<double>> feats(graph.n);
  std::string line;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != columns)
      throw std::runtime_error("data file line " + std::to_string(lineno) +
                               ": expected " + std::to_string(columns) +
                               " cells");
    auto numeric = [&](const std::string& s) {
      try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
      } catch (...) {
        throw std::runtime_error("data file line " + std::to_string(lineno) +
                                 ": non-numeric cell '" + s + "'");
      }
    };
    int node = static_cast<int>(numeric(cells[0]));
    if (node < 0 || node >= graph.n)
      throw std::runtime_error("data file line " + std::to_string(lineno) +
                               ": node_id " + std::to_string(node) +
                               " outside the graph");
    ys[node].push_back(numeric(cells[1]));
    for (int c = 0; c < n_features; ++c)
      feats[node].push_back(numeric(cells[2 + c]));
  }

  std::vector<Eigen::MatrixXd> mats(graph.n);
  std::vector<Eigen::VectorXd> rhs(graph.n);
  for (int i = 0; i < graph.n; ++i) {
    if (ys[i].empty())
      throw std::runtime_error("data file: graph node " + std::to_string(i) +
                               " has no data rows");
    auto rows = static_cast<Eigen::Index>(ys[i].size());
    Eigen::MatrixXd a(rows, n_features + 1);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (int c = 0; c < n_features; ++c)
        a(r, c) = feats[i][static_cast<std::size_t>(r) * n_features + c];
      a(r, n_features) = 1.0;
    }
    mats[i] = std::move(a);
    rhs[i] = Eigen::Map<Eigen::VectorXd>(ys[i].data(), rows);
  }
  Instance inst = detail::assemble_instance(std::move(graph), std::move(mats),
                                            std::move(rhs), lambda, variant,
                                            tau);
  return inst;
}

// --- theory bounds ------------------------------------------------------

struct TheoryBounds {
  double gamma = 0.0;         // 2 alpha mu - 3 alpha^2 L^2
  double delta = 0.0;         // 7 m^2 c^2 alpha^2
  double neighborhood = 0.0;  // delta / gamma
  bool alpha_valid = false;   // alpha in (0, 2 mu / (3 L^2))
  double constant_a = std::numeric_limits<double>::quiet_NaN();
};

inline TheoryBounds theory_bounds(double mu, double smoothness, double alpha,
                                  int m, double c) {
  if (mu <= 0.0 || smoothness <= 0.0)
    throw std::invalid_argument("theory_bounds: need mu > 0 and L > 0");
  TheoryBounds tb;
  tb.gamma = 2.0 * alpha * mu - 3.0 * alpha * alpha * smoothness * smoothness;
  tb.delta = 7.0 * static_cast<double>(m) * m * c * c * alpha * alpha;
  tb.alpha_valid =
      alpha > 0.0 && alpha < 2.0 * mu / (3.0 * smoothness * smoothness);
  tb.neighborhood = (tb.gamma > 0.0) ? tb.delta / tb.gamma : 0.0;
  return tb;
}

// Constant A of the strongly convex rate bound, given the squared distances
// of the first two iterates from x*.
inline double theory_constant_a(double mu, double smoothness, int m, double c,
                                double dist0_sq, double dist1_sq) {
  double l2 = smoothness * smoothness;
  double c2 = 7.0 * static_cast<double>(m) * m * c * c;
  return std::max({12.0 * l2 * dist0_sq,
                   (mu * mu + 12.0 * l2) * dist1_sq,
                   4.0 * (1.0 + 12.0 * l2 / (mu * mu)) * c2});
}

// Schedule constants from the instance spectra: L = max_i L_i,
// mu = min_i mu_i over the declared per-block constants.
inline std::pair<double, double> instance_mu_smoothness(const Problem& p) {
  double mu = std::numeric_limits<double>::infinity();
  double l = 0.0;
  for (const auto& loss : p.losses) {
    mu = std::min(mu, loss->strong_convexity());
    l = std::max(l, loss->smoothness());
  }
  return {mu, l};
}

// --- benchmark orchestration ------------------------------------------------

struct RepeatResult {
  std::uint64_t instance_seed = 0;
  std::string digest;
  double h_star = 0.0;
  double h_star_tol = 0.0;
  // Per algorithm (config order): final gap and mean units per iteration.
  std::vector<double> final_gap;
  std::vector<double> units_per_iteration;
  std::string error;  // nonempty when the repeat failed
};

struct BenchmarkSummary {
  std::vector<RepeatResult> repeats;
  // Aggregates in config algorithm order.
  std::vector<double> mean_final_gap;
  std::vector<double> std_final_gap;
  std::vector<double> mean_units_per_iteration;
};

inline Instance build_instance(const RunConfig& cfg,
                               std::uint64_t instance_seed) {
  if (cfg.setting == Setting::custom)
    return load_dataset(cfg.data_file, cfg.graph_file, cfg.lambda, cfg.variant,
                        cfg.tau);
  return synth_instance(cfg.group_sizes(), cfg.p_in(), cfg.p_out(), 21, 15,
                        cfg.sigma, cfg.lambda, cfg.variant, instance_seed,
                        cfg.tau);
}

inline std::unique_ptr<Algorithm> build_algorithm(const RunConfig& cfg,
                                                  AlgorithmKind kind,
                                                  const Instance& inst,
                                                  std::uint64_t run_seed) {
  const Problem& p = inst.problem;
  BlockPoint x0(p.n, p.d);
  switch (kind) {
    case AlgorithmKind::randomedge:
      return std::make_unique<RandomEdge>(
          p, StepSchedule::sqrt_decay(cfg.alpha0), x0, run_seed);
    case AlgorithmKind::blockprox:
      return std::make_unique<BlockProx>(
          p, StepSchedule::sqrt_decay(cfg.alpha0), x0, run_seed);
    case AlgorithmKind::admm:
      return std::make_unique<AdmmNetworkLasso>(p, cfg.resolved_rho(), x0);
    case AlgorithmKind::proxavg:
      return std::make_unique<ProxAvg>(
          p, StepSchedule::constant(cfg.dsgd_step), x0);
    case AlgorithmKind::dsgd:
      return std::make_unique<Dsgd>(p, metropolis_hastings_weights(inst.graph),
                                    cfg.dsgd_step, x0);
    case AlgorithmKind::walkman:
      return std::make_unique<Walkman>(p, inst.graph, cfg.walkman_beta, x0,
                                       run_seed);
  }
  throw std::logic_error("build_algorithm: unhandled kind");
}

inline double algorithm_step_parameter(const RunConfig& cfg,
                                       AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::randomedge:
    case AlgorithmKind::blockprox: return cfg.alpha0;
    case AlgorithmKind::admm: return cfg.resolved_rho();
    case AlgorithmKind::proxavg:
    case AlgorithmKind::dsgd: return cfg.dsgd_step;
    case AlgorithmKind::walkman: return cfg.walkman_beta;
  }
  return 0.0;
}

inline std::string algorithm_schedule_label(const RunConfig& cfg,
                                            AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::randomedge:
    case AlgorithmKind::blockprox:
      return "sqrt_decay(" + format_double(cfg.alpha0) + ")";
    case AlgorithmKind::admm:
      return "rho(" + format_double(cfg.resolved_rho()) + ")";
    case AlgorithmKind::proxavg:
    case AlgorithmKind::dsgd:
      return "constant(" + format_double(cfg.dsgd_step) + ")";
    case AlgorithmKind::walkman:
      return "beta(" + format_double(cfg.walkman_beta) + ")";
  }
  return "?";
}

// Runs every (algorithm x repeat) pair, writing one trace CSV per pair plus
// manifest.txt and summary.csv into cfg.out_dir. A reference solve is done
// once per instance and its H* anchors all gaps for that repeat.
inline BenchmarkSummary run_benchmark(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);

  BenchmarkSummary summary;
  summary.repeats.resize(cfg.repeats);

  StopRule stop = (cfg.max_iters > 0) ? StopRule::iterations(cfg.max_iters)
                                      : StopRule::budget(cfg.budget);

  auto run_repeat = [&](int r) {
    RepeatResult& result = summary.repeats[r];
    result.instance_seed = derive_seed(cfg.seed, r, stream::instance);
    try {
      std::uint64_t repeat_seed = derive_seed(cfg.seed, r, stream::run);
      std::optional<Instance> shared;
      std::optional<ReferenceSolution> shared_ref;
      if (cfg.shared_instance) {
        shared = build_instance(cfg, result.instance_seed);
        shared_ref =
            reference_solve(shared->problem, cfg.ref_iters, cfg.ref_tol);
        result.digest = shared->digest;
        result.h_star = shared_ref->h_star;
        result.h_star_tol = shared_ref->tol_achieved;
        if (cfg.save_instances)
          save_instance(*shared,
                        (fs::path(cfg.out_dir) /
                         ("data_rep" + std::to_string(r) + ".csv"))
                            .string(),
                        (fs::path(cfg.out_dir) /
                         ("graph_rep" + std::to_string(r) + ".txt"))
                            .string());
      }

      for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
        AlgorithmKind kind = cfg.algorithms[a];
        std::optional<Instance> own;
        std::optional<ReferenceSolution> own_ref;
        if (!cfg.shared_instance) {
          std::uint64_t iseed = derive_seed(result.instance_seed,
                                            algorithm_tag(kind),
                                            stream::instance);
          own = build_instance(cfg, iseed);
          own_ref = reference_solve(own->problem, cfg.ref_iters, cfg.ref_tol);
          if (!result.digest.empty()) result.digest += "+";
          result.digest += own->digest;
          result.h_star = own_ref->h_star;
          result.h_star_tol = own_ref->tol_achieved;
          if (cfg.save_instances)
            save_instance(*own,
                          (fs::path(cfg.out_dir) /
                           ("data_" + std::string(algorithm_name(kind)) +
                            "_rep" + std::to_string(r) + ".csv"))
                              .string(),
                          (fs::path(cfg.out_dir) /
                           ("graph_" + std::string(algorithm_name(kind)) +
                            "_rep" + std::to_string(r) + ".txt"))
                              .string());
        }
        const Instance& inst = cfg.shared_instance ? *shared : *own;
        const ReferenceSolution& ref =
            cfg.shared_instance ? *shared_ref : *own_ref;

        std::uint64_t run_seed =
            derive_seed(repeat_seed, algorithm_tag(kind), stream::run);
        auto algorithm = build_algorithm(cfg, kind, inst, run_seed);
        RunTrace trace = run(*algorithm, inst.problem, ref.h_star, stop,
                             cfg.eval_stride);
        trace.meta.seed = run_seed;
        trace.meta.algorithm = algorithm_name(kind);
        trace.meta.alpha0 = algorithm_step_parameter(cfg, kind);
        trace.meta.lambda = cfg.lambda;
        trace.meta.m = inst.problem.component_count();
        trace.meta.n = inst.problem.n;
        trace.meta.d = inst.problem.d;
        trace.meta.h_star = ref.h_star;
        trace.meta.h_star_tol = ref.tol_achieved;
        trace.meta.schedule = algorithm_schedule_label(cfg, kind);
        trace.meta.instance_digest = inst.digest;
        fs::path out = fs::path(cfg.out_dir) /
                       (std::string(algorithm_name(kind)) + "_rep" +
                        std::to_string(r) + ".csv");
        write_trace_csv(out, trace);

        const TraceRow& last = trace.rows.back();
        result.final_gap.push_back(last.gap);
        result.units_per_iteration.push_back(
            last.iter > 0 ? static_cast<double>(last.comm_units) /
                                static_cast<double>(last.iter)
                          : 0.0);
      }
    } catch (const std::exception& e) {
      result.error = e.what();
    }
  };

  int jobs = std::min(cfg.resolved_jobs(), cfg.repeats);
  if (jobs <= 1) {
    for (int r = 0; r < cfg.repeats; ++r) run_repeat(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (int w = 0; w < jobs; ++w)
      workers.emplace_back([&]() {
        while (true) {
          int r = next.fetch_add(1);
          if (r >= cfg.repeats) return;
          run_repeat(r);
        }
      });
    for (auto& t : workers) t.join();
  }

  // Manifest: a parseable config echo plus per-repeat notes as comments.
  std::string manifest = config_to_manifest(cfg);
  for (int r = 0; r < cfg.repeats; ++r) {
    const RepeatResult& res = summary.repeats[r];
    manifest += "# repeat " + std::to_string(r) +
                ": instance_seed=" + std::to_string(res.instance_seed);
    if (res.error.empty()) {
      manifest += " digest=" + res.digest +
                  " h_star=" + format_double(res.h_star) +
                  " h_star_tol=" + format_double(res.h_star_tol);
    } else {
      manifest += " ERROR=" + res.error;
    }
    manifest += "\n";
  }
  write_file_atomic(fs::path(cfg.out_dir) / "manifest.txt", manifest);

  for (int r = 0; r < cfg.repeats; ++r)
    if (!summary.repeats[r].error.empty())
      throw std::runtime_error("repeat " + std::to_string(r) +
                               " failed: " + summary.repeats[r].error);

  std::string csv = "algorithm,mean_final_gap,std_final_gap,mean_units_per_iteration\n";
  for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
    std::vector<double> gaps, units;
    for (const auto& res : summary.repeats) {
      gaps.push_back(res.final_gap[a]);
      units.push_back(res.units_per_iteration[a]);
    }
    summary.mean_final_gap.push_back(mean(gaps));
    summary.std_final_gap.push_back(stddev(gaps));
    summary.mean_units_per_iteration.push_back(mean(units));
    csv += std::string(algorithm_name(cfg.algorithms[a])) + "," +
           format_double(summary.mean_final_gap.back()) + "," +
           format_double(summary.std_final_gap.back()) + "," +
           format_double(summary.mean_units_per_iteration.back()) + "\n";
  }
  write_file_atomic(fs::path(cfg.out_dir) / "summary.csv", csv);
  return summary;
}

}  // namespace blockprox
