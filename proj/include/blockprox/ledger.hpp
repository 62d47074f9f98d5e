// ledger.hpp - unit-message accounting and run traces
//
// The accounting unit is one R^d block transfer between nodes; an R^{nd}
// transfer counts n units.
#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockprox {

class CommLedger {
 public:
  // Opens the accounting slot for the next iteration.
  void begin_iteration() { per_iteration_.push_back(0); }

  void charge(std::int64_t units) {
    if (units < 0) throw std::invalid_argument("CommLedger: negative charge");
    if (per_iteration_.empty())
      throw std::logic_error("CommLedger: charge before begin_iteration");
    per_iteration_.back() += units;
    cumulative_ += units;
  }

  std::int64_t cumulative() const { return cumulative_; }
  const std::vector<std::int64_t>& per_iteration() const {
    return per_iteration_;
  }
  std::size_t iterations() const { return per_iteration_.size(); }

 private:
  std::vector<std::int64_t> per_iteration_;
  std::int64_t cumulative_ = 0;
};

struct TraceRow {
  long iter = 0;
  std::int64_t comm_units = 0;
  double objective = 0.0;
  double gap = 0.0;
};

struct TraceMeta {
  std::uint64_t seed = 0;
  std::string algorithm;
  double alpha0 = 0.0;
  double lambda = 0.0;
  int m = 0;
  int n = 0;
  int d = 0;
  double h_star = 0.0;
  double h_star_tol = 0.0;
  std::string schedule;
  std::string instance_digest;
};

struct RunTrace {
  TraceMeta meta;
  std::vector<TraceRow> rows;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

inline std::string trace_to_csv(const RunTrace& trace) {
  std::string out;
  const TraceMeta& m = trace.meta;
  out += "# seed=" + std::to_string(m.seed) + "\n";
  out += "# algorithm=" + m.algorithm + "\n";
  out += "# alpha0=" + format_double(m.alpha0) + "\n";
  out += "# lambda=" + format_double(m.lambda) + "\n";
  out += "# m=" + std::to_string(m.m) + "\n";
  out += "# n=" + std::to_string(m.n) + "\n";
  out += "# d=" + std::to_string(m.d) + "\n";
  out += "# h_star=" + format_double(m.h_star) + "\n";
  out += "# h_star_tol=" + format_double(m.h_star_tol) + "\n";
  out += "# schedule=" + m.schedule + "\n";
  out += "# instance_digest=" + m.instance_digest + "\n";
  out += "iter,comm_units,objective,gap\n";
  for (const TraceRow& r : trace.rows) {
    out += std::to_string(r.iter) + "," + std::to_string(r.comm_units) + "," +
           format_double(r.objective) + "," + format_double(r.gap) + "\n";
  }
  return out;
}

// Writes via a temp file and atomic rename so no output is left half-written.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string());
    f << contents;
    if (!f) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline void write_trace_csv(const std::filesystem::path& path,
                            const RunTrace& trace) {
  write_file_atomic(path, trace_to_csv(trace));
}

}  // namespace blockprox
