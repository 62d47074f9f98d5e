// topology.hpp - graphs and hypergraphs of node coupling
//
// A Graph lists undirected edges (i, j) with i < j. A Hypergraph lists
// support sets S_j: the blocks that regularizer component j depends on.
// Every graph induces the hypergraph with one two-element support per edge.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "blockprox/rng.hpp"

namespace blockprox {

struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // i < j, unique, no self-loops

  int edge_count() const { return static_cast<int>(edges.size()); }

  int degree(int i) const {
    int deg = 0;
    for (const auto& [a, b] : edges)
      if (a == i || b == i) ++deg;
    return deg;
  }

  std::vector<int> degrees() const {
    std::vector<int> deg(n, 0);
    for (const auto& [a, b] : edges) {
      ++deg[a];
      ++deg[b];
    }
    return deg;
  }

  // Edge indices incident to each node, in edge order.
  std::vector<std::vector<int>> incidence() const {
    std::vector<std::vector<int>> inc(n);
    for (int e = 0; e < edge_count(); ++e) {
      inc[edges[e].first].push_back(e);
      inc[edges[e].second].push_back(e);
    }
    return inc;
  }
};

inline void validate_graph(const Graph& g) {
  if (g.n < 0) throw std::invalid_argument("graph: negative node count");
  std::set<std::pair<int, int>> seen;
  for (const auto& [i, j] : g.edges) {
    if (!(0 <= i && i < j && j < g.n))
      throw std::invalid_argument("graph: edge (" + std::to_string(i) + "," +
                                  std::to_string(j) +
                                  ") violates 0 <= i < j < n");
    if (!seen.insert({i, j}).second)
      throw std::invalid_argument("graph: duplicate edge (" +
                                  std::to_string(i) + "," + std::to_string(j) +
                                  ")");
  }
}

inline Graph make_graph(int n, std::vector<std::pair<int, int>> edges) {
  Graph g{n, std::move(edges)};
  validate_graph(g);
  return g;
}

struct Hypergraph {
  int n = 0;
  std::vector<std::vector<int>> supports;  // each S_j nonempty, members < n

  int component_count() const { return static_cast<int>(supports.size()); }

  // d_i = number of components whose support contains node i
  int membership_count(int i) const {
    int d = 0;
    for (const auto& s : supports)
      if (std::find(s.begin(), s.end(), i) != s.end()) ++d;
    return d;
  }
};

inline void validate_hypergraph(const Hypergraph& h) {
  if (h.n <= 0) throw std::invalid_argument("hypergraph: need n >= 1");
  if (h.supports.empty()) throw std::invalid_argument("hypergraph: need m >= 1");
  for (const auto& s : h.supports) {
    if (s.empty()) throw std::invalid_argument("hypergraph: empty support");
    std::set<int> uniq(s.begin(), s.end());
    if (uniq.size() != s.size())
      throw std::invalid_argument("hypergraph: repeated node in a support");
    for (int i : s)
      if (i < 0 || i >= h.n)
        throw std::invalid_argument("hypergraph: node " + std::to_string(i) +
                                    " out of range");
  }
}

inline Hypergraph make_hypergraph(int n, std::vector<std::vector<int>> supports) {
  Hypergraph h{n, std::move(supports)};
  validate_hypergraph(h);
  return h;
}

// One support {i, j} per edge, in edge order.
inline Hypergraph hypergraph_from_graph(const Graph& g) {
  Hypergraph h;
  h.n = g.n;
  h.supports.reserve(g.edges.size());
  for (const auto& [i, j] : g.edges) h.supports.push_back({i, j});
  return h;
}

// Expected unit messages per iteration under uniform component sampling:
// sum_j (a_j^2 - a_j) / m with a_j = |S_j|.
inline double expected_comm_per_iteration(const Hypergraph& h) {
  double total = 0.0;
  for (const auto& s : h.supports) {
    double a = static_cast<double>(s.size());
    total += a * a - a;
  }
  return total / static_cast<double>(h.supports.size());
}

// Probability that node i communicates in one iteration: d_i / m.
inline double node_comm_probability(const Hypergraph& h, int i) {
  if (i < 0 || i >= h.n)
    throw std::invalid_argument("node_comm_probability: node out of range");
  return static_cast<double>(h.membership_count(i)) /
         static_cast<double>(h.component_count());
}

// Uniform component index. Consumes exactly one draw from rng.
inline int sample_component(const Hypergraph& h, Rng& rng) {
  return static_cast<int>(
      rng.bounded(static_cast<std::uint64_t>(h.component_count())));
}

// Uniform edge among those incident to node i. Consumes exactly one draw.
inline int sample_incident_edge(const Graph& g, int i, Rng& rng) {
  std::vector<int> inc;
  for (int e = 0; e < g.edge_count(); ++e)
    if (g.edges[e].first == i || g.edges[e].second == i) inc.push_back(e);
  if (inc.empty())
    throw std::invalid_argument("sample_incident_edge: isolated node " +
                                std::to_string(i));
  return inc[rng.bounded(inc.size())];
}

// Stochastic block model. Node ids are grouped contiguously in group order;
// every unordered pair (i, j), i < j, is visited in lexicographic order and
// consumes exactly one draw, so a fixed seed fixes the graph.
// May return a disconnected graph, including isolated nodes.
inline Graph sbm_generate(const std::vector<int>& group_sizes, double p_in,
                          double p_out, Rng& rng) {
  if (group_sizes.empty())
    throw std::invalid_argument("sbm_generate: need at least one group");
  if (!(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0))
    throw std::invalid_argument("sbm_generate: probabilities must be in [0,1]");
  std::vector<int> group;
  for (std::size_t gidx = 0; gidx < group_sizes.size(); ++gidx) {
    if (group_sizes[gidx] <= 0)
      throw std::invalid_argument("sbm_generate: group sizes must be positive");
    group.insert(group.end(), group_sizes[gidx], static_cast<int>(gidx));
  }
  Graph g;
  g.n = static_cast<int>(group.size());
  for (int i = 0; i < g.n; ++i)
    for (int j = i + 1; j < g.n; ++j) {
      double p = (group[i] == group[j]) ? p_in : p_out;
      if (rng.bernoulli(p)) g.edges.emplace_back(i, j);
    }
  return g;
}

// Metropolis-Hastings mixing matrix: W(i,j) = 1/(1 + max(deg i, deg j)) on
// edges, diagonal absorbs the remainder. Symmetric and doubly stochastic.
inline Eigen::MatrixXd metropolis_hastings_weights(const Graph& g) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(g.n, g.n);
  std::vector<int> deg = g.degrees();
  for (const auto& [i, j] : g.edges) {
    double v = 1.0 / (1.0 + static_cast<double>(std::max(deg[i], deg[j])));
    w(i, j) = v;
    w(j, i) = v;
  }
  for (int i = 0; i < g.n; ++i) w(i, i) = 1.0 - w.row(i).sum();
  return w;
}

// --- file formats -----------------------------------------------------------
// Graph:      first line "n m", then m lines "i j" (0-based, i < j).
// Hypergraph: first line "n m", then m lines "a_j i1 ... i_{a_j}".

inline void write_graph(std::ostream& os, const Graph& g) {
  os << g.n << " " << g.edge_count() << "\n";
  for (const auto& [i, j] : g.edges) os << i << " " << j << "\n";
}

inline Graph read_graph(std::istream& is) {
  int n = 0, m = 0;
  if (!(is >> n >> m)) throw std::runtime_error("graph file: bad header");
  std::vector<std::pair<int, int>> edges(m);
  for (int e = 0; e < m; ++e)
    if (!(is >> edges[e].first >> edges[e].second))
      throw std::runtime_error("graph file: truncated edge list");
  return make_graph(n, std::move(edges));
}

inline void write_hypergraph(std::ostream& os, const Hypergraph& h) {
  os << h.n << " " << h.component_count() << "\n";
  for (const auto& s : h.supports) {
    os << s.size();
    for (int i : s) os << " " << i;
    os << "\n";
  }
}

inline Hypergraph read_hypergraph(std::istream& is) {
  int n = 0, m = 0;
  if (!(is >> n >> m)) throw std::runtime_error("hypergraph file: bad header");
  std::vector<std::vector<int>> supports(m);
  for (int j = 0; j < m; ++j) {
    std::size_t a = 0;
    if (!(is >> a)) throw std::runtime_error("hypergraph file: truncated");
    supports[j].resize(a);
    for (std::size_t k = 0; k < a; ++k)
      if (!(is >> supports[j][k]))
        throw std::runtime_error("hypergraph file: truncated support");
  }
  return make_hypergraph(n, std::move(supports));
}

inline Graph load_graph_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open graph file: " + path);
  return read_graph(f);
}

inline Hypergraph load_hypergraph_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open hypergraph file: " + path);
  return read_hypergraph(f);
}

}  // namespace blockprox
