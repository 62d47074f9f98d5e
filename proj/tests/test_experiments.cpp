#include <catch2/catch_amalgamated.hpp>

#include "blockprox/experiments.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace blockprox;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  f << text;
}

}  // namespace

TEST_CASE("synth_instance settings") {
  SECTION("five benchmark groups give 75 nodes, 21 features, 15 samples") {
    Instance inst = synth_instance({10, 17, 18, 18, 12}, 0.5, 0.01, 21, 15,
                                   0.01, 1.0, RegVariant::l2, 42);
    REQUIRE(inst.problem.n == 75);
    REQUIRE(inst.problem.d == 21);
    REQUIRE(inst.problem.component_count() == inst.graph.edge_count());
    const auto* ls =
        dynamic_cast<const LeastSquaresLoss*>(inst.problem.losses[0].get());
    REQUIRE(ls->matrix().rows() == 15);
    REQUIRE(ls->matrix().cols() == 21);
  }
  SECTION("single 20-node group") {
    Instance inst = synth_instance({20}, 0.5, 0.01, 21, 15, 0.01, 1.0,
                                   RegVariant::l2, 42);
    REQUIRE(inst.problem.n == 20);
  }
  SECTION("40 fully connected nodes have 780 edges") {
    Instance inst = synth_instance({40}, 1.0, 1.0, 21, 15, 0.01, 1.0,
                                   RegVariant::l1, 42);
    REQUIRE(inst.graph.edge_count() == 780);
  }
  SECTION("preconditions") {
    REQUIRE_THROWS_AS(synth_instance({}, 0.5, 0.01, 21, 15, 0.01, 1.0,
                                     RegVariant::l2, 1),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(synth_instance({3}, 0.5, 0.01, 1, 15, 0.01, 1.0,
                                     RegVariant::l2, 1),
                      std::invalid_argument);
  }
}

TEST_CASE("synth_instance structure") {
  Instance inst =
      synth_instance({4, 5}, 0.6, 0.1, 6, 5, 0.01, 1.0, RegVariant::l2, 99);
  SECTION("bias column is all ones") {
    for (int i = 0; i < inst.problem.n; ++i) {
      const auto* ls =
          dynamic_cast<const LeastSquaresLoss*>(inst.problem.losses[i].get());
      REQUIRE((ls->matrix().col(5).array() == 1.0).all());
    }
  }
  SECTION("nodes in the same group share the ground truth") {
    REQUIRE(inst.group_of[0] == inst.group_of[3]);
    REQUIRE((inst.ground_truth[0] - inst.ground_truth[3]).norm() == 0.0);
    REQUIRE(inst.group_of[0] != inst.group_of[4]);
    REQUIRE((inst.ground_truth[0] - inst.ground_truth[4]).norm() > 0.0);
  }
  SECTION("targets equal A x* plus small noise") {
    for (int i = 0; i < inst.problem.n; ++i) {
      const auto* ls =
          dynamic_cast<const LeastSquaresLoss*>(inst.problem.losses[i].get());
      Eigen::VectorXd residual =
          ls->target() - ls->matrix() * inst.ground_truth[i];
      // sigma = 0.01 over 5 samples: noise norm is a few hundredths
      REQUIRE(residual.norm() < 0.2);
      REQUIRE(residual.norm() > 0.0);
    }
  }
  SECTION("same seed reproduces everything, different seed does not") {
    Instance again =
        synth_instance({4, 5}, 0.6, 0.1, 6, 5, 0.01, 1.0, RegVariant::l2, 99);
    REQUIRE(again.digest == inst.digest);
    REQUIRE(again.graph.edges == inst.graph.edges);
    Instance other =
        synth_instance({4, 5}, 0.6, 0.1, 6, 5, 0.01, 1.0, RegVariant::l2, 100);
    REQUIRE(other.digest != inst.digest);
  }
}

TEST_CASE("load_dataset on a hand-written CSV") {
  auto data = temp_file("bp_test_data.csv");
  auto graph = temp_file("bp_test_graph.txt");
  write_text(data,
             "node_id,y,x1\n"
             "0,2.0,1.0\n"
             "0,3.0,-1.0\n"
             "1,0.5,2.0\n"
             "1,1.5,0.0\n");
  write_text(graph, "2 1\n0 1\n");
  Instance inst = load_dataset(data.string(), graph.string(), 1.0,
                               RegVariant::l2);
  REQUIRE(inst.problem.n == 2);
  REQUIRE(inst.problem.d == 2);  // one feature plus bias
  const auto* ls0 =
      dynamic_cast<const LeastSquaresLoss*>(inst.problem.losses[0].get());
  Eigen::MatrixXd a0(2, 2);
  a0 << 1.0, 1.0, -1.0, 1.0;
  REQUIRE((ls0->matrix() - a0).norm() == 0.0);
  REQUIRE(ls0->target()[0] == 2.0);
  REQUIRE(ls0->target()[1] == 3.0);
  const auto* ls1 =
      dynamic_cast<const LeastSquaresLoss*>(inst.problem.losses[1].get());
  REQUIRE(ls1->matrix()(0, 0) == 2.0);
  REQUIRE(ls1->matrix()(1, 1) == 1.0);
}

TEST_CASE("load_dataset error paths") {
  auto data = temp_file("bp_test_bad.csv");
  auto graph = temp_file("bp_test_bad_graph.txt");
  SECTION("graph node without rows") {
    write_text(data, "node_id,y,x1\n0,1.0,2.0\n");
    write_text(graph, "2 1\n0 1\n");
    REQUIRE_THROWS_WITH(
        load_dataset(data.string(), graph.string(), 1.0, RegVariant::l2),
        Catch::Matchers::ContainsSubstring("has no data rows"));
  }
  SECTION("non-numeric cell") {
    write_text(data, "node_id,y,x1\n0,1.0,abc\n1,1.0,2.0\n");
    write_text(graph, "2 1\n0 1\n");
    REQUIRE_THROWS_WITH(
        load_dataset(data.string(), graph.string(), 1.0, RegVariant::l2),
        Catch::Matchers::ContainsSubstring("non-numeric"));
  }
}

TEST_CASE("save and reload round trips objective values") {
  Instance inst =
      synth_instance({3, 3}, 0.7, 0.2, 5, 4, 0.01, 0.8, RegVariant::l1, 7);
  auto data = temp_file("bp_roundtrip.csv");
  auto graph = temp_file("bp_roundtrip_graph.txt");
  save_instance(inst, data.string(), graph.string());
  Instance back = load_dataset(data.string(), graph.string(), 0.8,
                               RegVariant::l1);
  REQUIRE(back.problem.n == inst.problem.n);
  REQUIRE(back.problem.d == inst.problem.d);
  REQUIRE(back.graph.edges == inst.graph.edges);

  Rng rng(5);
  for (int probe = 0; probe < 5; ++probe) {
    BlockPoint x(inst.problem.n, inst.problem.d);
    for (int i = 0; i < inst.problem.n; ++i)
      for (int k = 0; k < inst.problem.d; ++k) x.block(i)[k] = rng.normal();
    REQUIRE(objective_value(back.problem, x) ==
            Catch::Approx(objective_value(inst.problem, x)).margin(1e-12));
  }
}

TEST_CASE("theory_bounds") {
  double mu = 2.0, l = 4.0;
  SECTION("alpha at the gamma maximizer") {
    double alpha = mu / (3.0 * l * l);
    TheoryBounds tb = theory_bounds(mu, l, alpha, 5, 1.0);
    REQUIRE(tb.gamma == Catch::Approx(mu * mu / (3.0 * l * l)));
    REQUIRE(tb.alpha_valid);
  }
  SECTION("neighborhood shrinks linearly for small alpha") {
    TheoryBounds big = theory_bounds(mu, l, 1e-4, 5, 1.0);
    TheoryBounds small = theory_bounds(mu, l, 5e-5, 5, 1.0);
    REQUIRE(big.neighborhood / small.neighborhood ==
            Catch::Approx(2.0).epsilon(0.01));
  }
  SECTION("zero subgradient bound removes the neighborhood") {
    TheoryBounds tb = theory_bounds(mu, l, 1e-3, 5, 0.0);
    REQUIRE(tb.delta == 0.0);
    REQUIRE(tb.neighborhood == 0.0);
  }
  SECTION("invalid alpha is flagged, not fatal") {
    double limit = 2.0 * mu / (3.0 * l * l);
    TheoryBounds tb = theory_bounds(mu, l, 2.0 * limit, 5, 1.0);
    REQUIRE_FALSE(tb.alpha_valid);
  }
}

TEST_CASE("instance spectra feed the schedules") {
  Instance inst =
      synth_instance({4}, 0.8, 0.1, 5, 8, 0.01, 1.0, RegVariant::l2, 3, 0.5);
  auto [mu, l] = instance_mu_smoothness(inst.problem);
  REQUIRE(mu > 0.0);  // ridge tau = 0.5 makes every block strongly convex
  REQUIRE(l >= mu);
  for (const auto& loss : inst.problem.losses) {
    REQUIRE(loss->strong_convexity() >= mu);
    REQUIRE(loss->smoothness() <= l);
  }
}

TEST_CASE("dsgd fits only a few iterations into a 10,000-unit budget") {
  Instance inst = synth_instance({20}, 0.5, 0.01, 21, 15, 0.01, 1.0,
                                 RegVariant::l2, 17);
  const Problem& p = inst.problem;
  auto m = static_cast<std::int64_t>(p.component_count());
  auto cost = 2 * m * p.n;
  Dsgd alg(p, metropolis_hastings_weights(inst.graph), 0.01,
           BlockPoint(p.n, p.d));
  RunTrace trace = run(alg, p, 0.0, StopRule::budget(10000), 1);
  long expected = 10000 / cost + (10000 % cost != 0 ? 1 : 0);
  REQUIRE(trace.rows.back().iter == expected);
  REQUIRE(expected <= 5);
}

TEST_CASE("randomedge executes about 5000 iterations in a 10,000-unit budget") {
  Instance inst = synth_instance({10, 17, 18, 18, 12}, 0.5, 0.01, 21, 15,
                                 0.01, 1.0, RegVariant::l2, 23);
  RandomEdge alg(inst.problem, StepSchedule::sqrt_decay(0.01),
                 BlockPoint(inst.problem.n, inst.problem.d), 29);
  RunTrace trace =
      run(alg, inst.problem, 0.0, StopRule::budget(10000), 100000);
  REQUIRE(trace.rows.back().iter > 4500);
  REQUIRE(trace.rows.back().iter < 5500);
}

TEST_CASE("run_benchmark writes traces, manifest, and summary") {
  namespace fs = std::filesystem;
  RunConfig cfg;
  cfg.setting = Setting::sbm_ii;
  cfg.algorithms = {AlgorithmKind::randomedge, AlgorithmKind::admm};
  cfg.repeats = 2;
  cfg.budget = 800;
  cfg.seed = 99;
  cfg.eval_stride = 50;
  cfg.ref_iters = 2000;
  cfg.out_dir = (fs::temp_directory_path() / "bp_bench_test").string();
  fs::remove_all(cfg.out_dir);

  BenchmarkSummary summary = run_benchmark(cfg);
  REQUIRE(summary.mean_final_gap.size() == 2);
  REQUIRE(summary.mean_units_per_iteration[0] ==
          Catch::Approx(2.0).margin(0.25));
  for (int r = 0; r < 2; ++r) {
    REQUIRE(fs::exists(fs::path(cfg.out_dir) /
                       ("randomedge_rep" + std::to_string(r) + ".csv")));
    REQUIRE(fs::exists(fs::path(cfg.out_dir) /
                       ("admm_rep" + std::to_string(r) + ".csv")));
    REQUIRE(summary.repeats[r].error.empty());
    // overshoot rule: final units land in [budget, budget + max step cost)
    for (double units : summary.repeats[r].units_per_iteration)
      REQUIRE(units > 0.0);
  }
  REQUIRE(fs::exists(fs::path(cfg.out_dir) / "manifest.txt"));
  REQUIRE(fs::exists(fs::path(cfg.out_dir) / "summary.csv"));

  std::ifstream manifest(fs::path(cfg.out_dir) / "manifest.txt");
  std::string text((std::istreambuf_iterator<char>(manifest)),
                   std::istreambuf_iterator<char>());
  REQUIRE(text.find("seed = 99") != std::string::npos);
  REQUIRE(text.find("# repeat 0:") != std::string::npos);
}

TEST_CASE("run_benchmark with lambda = 0 anchors gaps at the per-block solve") {
  namespace fs = std::filesystem;
  RunConfig cfg;
  cfg.setting = Setting::sbm_ii;
  cfg.algorithms = {AlgorithmKind::randomedge};
  cfg.lambda = 0.0;
  cfg.repeats = 1;
  cfg.budget = 600;
  cfg.seed = 7;
  cfg.ref_iters = 2000;
  cfg.out_dir = (fs::temp_directory_path() / "bp_bench_l0").string();
  fs::remove_all(cfg.out_dir);
  BenchmarkSummary summary = run_benchmark(cfg);

  // independent oracle: decoupled least-squares residuals per block
  Instance inst = build_instance(cfg, summary.repeats[0].instance_seed);
  double oracle = 0.0;
  for (const auto& loss : inst.problem.losses) {
    const auto* ls = dynamic_cast<const LeastSquaresLoss*>(loss.get());
    Eigen::VectorXd sol =
        ls->matrix().completeOrthogonalDecomposition().solve(ls->target());
    oracle += 0.5 * (ls->matrix() * sol - ls->target()).squaredNorm();
  }
  REQUIRE(summary.repeats[0].h_star == Catch::Approx(oracle).margin(1e-4));
}

TEST_CASE("run_benchmark options: per-algorithm instances and saved data") {
  namespace fs = std::filesystem;
  RunConfig cfg;
  cfg.setting = Setting::sbm_ii;
  cfg.algorithms = {AlgorithmKind::randomedge, AlgorithmKind::proxavg};
  cfg.repeats = 1;
  cfg.budget = 400;
  cfg.seed = 5;
  cfg.ref_iters = 2000;
  cfg.shared_instance = false;
  cfg.save_instances = true;
  cfg.out_dir = (fs::temp_directory_path() / "bp_bench_fresh").string();
  fs::remove_all(cfg.out_dir);
  BenchmarkSummary summary = run_benchmark(cfg);
  REQUIRE(summary.repeats[0].error.empty());
  // two distinct instances leave a joined digest and per-algorithm files
  REQUIRE(summary.repeats[0].digest.find('+') != std::string::npos);
  REQUIRE(fs::exists(fs::path(cfg.out_dir) / "data_randomedge_rep0.csv"));
  REQUIRE(fs::exists(fs::path(cfg.out_dir) / "graph_proxavg_rep0.txt"));

  Instance back = load_dataset(
      (fs::path(cfg.out_dir) / "data_randomedge_rep0.csv").string(),
      (fs::path(cfg.out_dir) / "graph_randomedge_rep0.txt").string(),
      cfg.lambda, cfg.variant);
  REQUIRE(back.problem.n == 20);
  REQUIRE(back.problem.d == 21);
}

TEST_CASE("theory constant A dominates its three terms") {
  double mu = 1.5, l = 3.0;
  double a = theory_constant_a(mu, l, 4, 0.7, 10.0, 2.0);
  double c2 = 7.0 * 16.0 * 0.49;
  REQUIRE(a >= 12.0 * l * l * 10.0 - 1e-9);
  REQUIRE(a >= (mu * mu + 12.0 * l * l) * 2.0 - 1e-9);
  REQUIRE(a >= 4.0 * (1.0 + 12.0 * l * l / (mu * mu)) * c2 - 1e-9);
}
