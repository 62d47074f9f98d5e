// commsim.hpp - synchronous round engine and sampling-rule simulation
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "blockprox/algorithms.hpp"
#include "blockprox/ledger.hpp"
#include "blockprox/objectives.hpp"
#include "blockprox/rng.hpp"
#include "blockprox/topology.hpp"

namespace blockprox {

struct StopRule {
  enum class Kind { max_iterations, max_units };
  Kind kind = Kind::max_units;
  std::int64_t limit = 0;

  static StopRule iterations(std::int64_t n) {
    if (n < 0) throw std::invalid_argument("StopRule: negative iteration cap");
    return {Kind::max_iterations, n};
  }
  static StopRule budget(std::int64_t units) {
    if (units < 0) throw std::invalid_argument("StopRule: negative budget");
    return {Kind::max_units, units};
  }
};

// Steps the algorithm until the stop rule fires. Under a unit budget the
// iteration that crosses the budget completes and is recorded, so the final
// cumulative count may overshoot. The objective is evaluated outside the
// communication model (it is never charged); rows are recorded at iteration
// 0, every `eval_stride` iterations, and at the final iteration.
inline RunTrace run(Algorithm& algorithm, const Problem& problem,
                    double h_star, const StopRule& stop, long eval_stride = 1,
                    long safety_cap = 50'000'000) {
  if (eval_stride < 1) throw std::invalid_argument("run: eval_stride >= 1");
  RunTrace trace;
  CommLedger ledger;
  auto record = [&](long iter) {
    double h = objective_value(problem, algorithm.iterate());
    trace.rows.push_back(TraceRow{iter, ledger.cumulative(), h, h - h_star});
  };
  record(0);
  long iter = 0;
  while (true) {
    if (stop.kind == StopRule::Kind::max_iterations && iter >= stop.limit)
      break;
    if (stop.kind == StopRule::Kind::max_units &&
        ledger.cumulative() >= stop.limit)
      break;
    if (iter >= safety_cap)
      throw std::runtime_error(
          "run: stop rule did not fire within the iteration safety cap");
    algorithm.step(ledger);
    ++iter;
    bool stopping =
        (stop.kind == StopRule::Kind::max_iterations && iter >= stop.limit) ||
        (stop.kind == StopRule::Kind::max_units &&
         ledger.cumulative() >= stop.limit);
    if (iter % eval_stride == 0 || stopping) record(iter);
  }
  return trace;
}

// Simulates only the sampling-and-charging rule of the randomized proximal
// step: every node draws one component uniformly per iteration and is
// charged a_j - 1 units when it belongs to the sampled support. Draw order
// is node-major within each iteration.
inline double monte_carlo_comm(const Hypergraph& h, long iterations,
                               Rng& rng) {
  if (iterations < 1)
    throw std::invalid_argument("monte_carlo_comm: iterations must be >= 1");
  const int m = h.component_count();
  std::int64_t total = 0;
  for (long it = 0; it < iterations; ++it) {
    for (int i = 0; i < h.n; ++i) {
      const auto& support = h.supports[rng.bounded(m)];
      for (int member : support)
        if (member == i) {
          total += static_cast<std::int64_t>(support.size()) - 1;
          break;
        }
    }
  }
  return static_cast<double>(total) / static_cast<double>(iterations);
}

}  // namespace blockprox
