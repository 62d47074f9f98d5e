#include <catch2/catch_amalgamated.hpp>

#include "blockprox/topology.hpp"
#include "test_helpers.hpp"

#include <cmath>
#include <map>
#include <sstream>

using namespace blockprox;
using blockprox::testing::four_node_graph;
using blockprox::testing::mixed_hypergraph;

TEST_CASE("graph validation rejects bad edges") {
  REQUIRE_THROWS_AS(make_graph(3, {{1, 0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(make_graph(3, {{0, 3}}), std::invalid_argument);
  REQUIRE_THROWS_AS(make_graph(3, {{1, 1}}), std::invalid_argument);
  REQUIRE_THROWS_AS(make_graph(3, {{0, 1}, {0, 1}}), std::invalid_argument);
}

TEST_CASE("handshake identity") {
  Graph g = four_node_graph();
  int total = 0;
  for (int i = 0; i < g.n; ++i) total += g.degree(i);
  REQUIRE(total == 2 * g.edge_count());
}

TEST_CASE("hypergraph from graph") {
  SECTION("triangle") {
    Graph g = make_graph(3, {{0, 1}, {0, 2}, {1, 2}});
    Hypergraph h = hypergraph_from_graph(g);
    REQUIRE(h.supports ==
            std::vector<std::vector<int>>{{0, 1}, {0, 2}, {1, 2}});
  }
  SECTION("single edge") {
    Graph g = make_graph(2, {{0, 1}});
    Hypergraph h = hypergraph_from_graph(g);
    REQUIRE(h.supports == std::vector<std::vector<int>>{{0, 1}});
  }
  SECTION("four-node five-edge graph") {
    Hypergraph h = hypergraph_from_graph(four_node_graph());
    REQUIRE(h.component_count() == 5);
    for (const auto& s : h.supports) REQUIRE(s.size() == 2);
  }
}

TEST_CASE("expected communication per iteration") {
  SECTION("any graph-derived hypergraph gives exactly 2") {
    REQUIRE(expected_comm_per_iteration(hypergraph_from_graph(
                four_node_graph())) == 2.0);
    Rng rng(42);
    Graph g = sbm_generate({9, 12, 5}, 0.4, 0.05, rng);
    if (g.edge_count() > 0)
      REQUIRE(expected_comm_per_iteration(hypergraph_from_graph(g)) == 2.0);
  }
  SECTION("mixed support sizes") {
    REQUIRE(expected_comm_per_iteration(mixed_hypergraph()) ==
            Catch::Approx(5.25));
  }
  SECTION("single singleton support") {
    Hypergraph h = make_hypergraph(1, {{0}});
    REQUIRE(expected_comm_per_iteration(h) == 0.0);
  }
}

TEST_CASE("node communication probability") {
  SECTION("degree-3 node of the five-edge graph") {
    Hypergraph h = hypergraph_from_graph(four_node_graph());
    REQUIRE(node_comm_probability(h, 1) == Catch::Approx(3.0 / 5.0));
  }
  SECTION("node in two of eight components") {
    REQUIRE(node_comm_probability(mixed_hypergraph(), 8) ==
            Catch::Approx(0.25));
  }
  SECTION("node in no support") {
    Hypergraph h = make_hypergraph(3, {{0, 1}});
    REQUIRE(node_comm_probability(h, 2) == 0.0);
  }
}

TEST_CASE("sample_component") {
  SECTION("degenerate m = 1") {
    Hypergraph h = make_hypergraph(2, {{0, 1}});
    Rng rng(3);
    for (int i = 0; i < 100; ++i) REQUIRE(sample_component(h, rng) == 0);
  }
  SECTION("uniform over m = 8 within 4 sigma") {
    Hypergraph h = mixed_hypergraph();
    Rng rng(17);
    const int draws = 100000;
    std::vector<int> counts(8, 0);
    for (int i = 0; i < draws; ++i) ++counts[sample_component(h, rng)];
    double expect = draws / 8.0;
    double sigma = std::sqrt(draws * (1.0 / 8.0) * (7.0 / 8.0));
    for (int c : counts) REQUIRE(std::abs(c - expect) < 4.0 * sigma);
  }
  SECTION("fixed seed gives identical draw sequences") {
    Hypergraph h = mixed_hypergraph();
    Rng a(5), b(5);
    for (int i = 0; i < 1000; ++i)
      REQUIRE(sample_component(h, a) == sample_component(h, b));
  }
}

TEST_CASE("sample_incident_edge") {
  Graph g = four_node_graph();
  SECTION("uniform over the three edges at node 1") {
    Rng rng(11);
    std::map<int, int> counts;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ++counts[sample_incident_edge(g, 1, rng)];
    REQUIRE(counts.size() == 3);
    for (const auto& [edge, count] : counts) {
      REQUIRE((edge == 0 || edge == 2 || edge == 3));
      REQUIRE(std::abs(count - draws / 3.0) <
              4.0 * std::sqrt(draws * (1.0 / 3.0) * (2.0 / 3.0)));
    }
  }
  SECTION("degree-1 node always picks its unique edge") {
    Graph path = make_graph(3, {{0, 1}, {1, 2}});
    Rng rng(2);
    for (int i = 0; i < 50; ++i)
      REQUIRE(sample_incident_edge(path, 0, rng) == 0);
  }
  SECTION("isolated node errors") {
    Graph iso = make_graph(3, {{0, 1}});
    Rng rng(2);
    REQUIRE_THROWS_AS(sample_incident_edge(iso, 2, rng),
                      std::invalid_argument);
  }
}

TEST_CASE("sbm_generate") {
  SECTION("benchmark group sizes give 75 nodes") {
    Rng rng(1);
    Graph g = sbm_generate({10, 17, 18, 18, 12}, 0.5, 0.01, rng);
    REQUIRE(g.n == 75);
    validate_graph(g);
  }
  SECTION("probability one gives the complete graph") {
    Rng rng(1);
    Graph g = sbm_generate({40}, 1.0, 1.0, rng);
    REQUIRE(g.edge_count() == 780);
  }
  SECTION("probability zero gives no edges") {
    Rng rng(1);
    Graph g = sbm_generate({5, 5}, 0.0, 0.0, rng);
    REQUIRE(g.edges.empty());
  }
  SECTION("same seed reproduces the graph") {
    Rng a(9), b(9);
    Graph ga = sbm_generate({8, 8}, 0.3, 0.05, a);
    Graph gb = sbm_generate({8, 8}, 0.3, 0.05, b);
    REQUIRE(ga.edges == gb.edges);
  }
}

TEST_CASE("metropolis_hastings_weights") {
  SECTION("path graph closed form") {
    Graph g = make_graph(3, {{0, 1}, {1, 2}});
    Eigen::MatrixXd w = metropolis_hastings_weights(g);
    REQUIRE(w(0, 1) == Catch::Approx(1.0 / 3.0));
    REQUIRE(w(1, 2) == Catch::Approx(1.0 / 3.0));
    REQUIRE(w(0, 0) == Catch::Approx(2.0 / 3.0));
    REQUIRE(w(1, 1) == Catch::Approx(1.0 / 3.0));
    REQUIRE(w(2, 2) == Catch::Approx(2.0 / 3.0));
    REQUIRE(w(0, 2) == 0.0);
  }
  SECTION("doubly stochastic and symmetric on random graphs") {
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
      Graph g = sbm_generate({6, 7}, 0.5, 0.1, rng);
      Eigen::MatrixXd w = metropolis_hastings_weights(g);
      REQUIRE((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
      for (int i = 0; i < g.n; ++i) {
        REQUIRE(w.row(i).sum() == Catch::Approx(1.0).margin(1e-12));
        REQUIRE(w.col(i).sum() == Catch::Approx(1.0).margin(1e-12));
      }
    }
  }
  SECTION("single node") {
    Graph g = make_graph(1, {});
    Eigen::MatrixXd w = metropolis_hastings_weights(g);
    REQUIRE(w.rows() == 1);
    REQUIRE(w(0, 0) == 1.0);
  }
}

TEST_CASE("per-node empirical frequency approaches d_i / m") {
  Hypergraph h = mixed_hypergraph();
  Rng rng(23);
  const int iters = 200000;
  std::vector<int> active(h.n, 0);
  for (int it = 0; it < iters; ++it)
    for (int i = 0; i < h.n; ++i) {
      const auto& s = h.supports[sample_component(h, rng)];
      if (std::find(s.begin(), s.end(), i) != s.end()) ++active[i];
    }
  for (int i = 0; i < h.n; ++i) {
    double p = node_comm_probability(h, i);
    double sigma = std::sqrt(p * (1 - p) / iters);
    REQUIRE(std::abs(active[i] / double(iters) - p) < 5.0 * sigma + 1e-12);
  }
}

TEST_CASE("uniform sampling and incident sampling activate each edge with 1/m") {
  Graph g = four_node_graph();
  Hypergraph h = hypergraph_from_graph(g);
  const int m = g.edge_count();
  auto inc = g.incidence();
  const int trials = 200000;

  // rule A: sample one of m components, active if the node belongs to it
  // rule B: Bernoulli(deg/m), then a uniform incident edge
  std::map<std::pair<int, int>, int> count_a, count_b;
  Rng rng_a(91), rng_b(92);
  for (int t = 0; t < trials; ++t)
    for (int i = 0; i < g.n; ++i) {
      int j = sample_component(h, rng_a);
      const auto& s = h.supports[j];
      if (std::find(s.begin(), s.end(), i) != s.end()) ++count_a[{i, j}];
      double p = double(inc[i].size()) / m;
      if (rng_b.bernoulli(p)) ++count_b[{i, sample_incident_edge(g, i, rng_b)}];
    }

  double expect = trials / double(m);
  double sigma = std::sqrt(trials * (1.0 / m) * (1.0 - 1.0 / m));
  for (int i = 0; i < g.n; ++i)
    for (int e : inc[i]) {
      REQUIRE(std::abs(count_a[{i, e}] - expect) < 5.0 * sigma);
      REQUIRE(std::abs(count_b[{i, e}] - expect) < 5.0 * sigma);
    }
}

TEST_CASE("topology file round trips") {
  SECTION("graph") {
    Graph g = four_node_graph();
    std::stringstream ss;
    write_graph(ss, g);
    Graph back = read_graph(ss);
    REQUIRE(back.n == g.n);
    REQUIRE(back.edges == g.edges);
  }
  SECTION("hypergraph") {
    Hypergraph h = mixed_hypergraph();
    std::stringstream ss;
    write_hypergraph(ss, h);
    Hypergraph back = read_hypergraph(ss);
    REQUIRE(back.n == h.n);
    REQUIRE(back.supports == h.supports);
  }
  SECTION("malformed input") {
    std::stringstream ss("2");
    REQUIRE_THROWS_AS(read_graph(ss), std::runtime_error);
  }
}
