// config.hpp - run configuration: flat key = value files with command-line
// overrides, flags winning. Unknown keys, missing required keys, and
// unparseable values are reported by name.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "blockprox/ledger.hpp"
#include "blockprox/objectives.hpp"

namespace blockprox {

enum class Setting { sbm_i, sbm_ii, sbm_iii, custom };

enum class AlgorithmKind { randomedge, blockprox, admm, proxavg, dsgd, walkman };

inline const char* algorithm_name(AlgorithmKind a) {
  switch (a) {
    case AlgorithmKind::randomedge: return "randomedge";
    case AlgorithmKind::blockprox: return "blockprox";
    case AlgorithmKind::admm: return "admm";
    case AlgorithmKind::proxavg: return "proxavg";
    case AlgorithmKind::dsgd: return "dsgd";
    case AlgorithmKind::walkman: return "walkman";
  }
  return "?";
}

// Stable per-algorithm tag used in seed derivation; list order in the
// config must not change the seeds of other algorithms.
inline std::uint64_t algorithm_tag(AlgorithmKind a) {
  return 1 + static_cast<std::uint64_t>(a);
}

struct RunConfig {
  std::string experiment = "benchmark";
  Setting setting = Setting::sbm_i;
  std::string data_file;   // custom setting only
  std::string graph_file;  // custom setting only
  std::vector<AlgorithmKind> algorithms = {
      AlgorithmKind::randomedge, AlgorithmKind::admm, AlgorithmKind::proxavg,
      AlgorithmKind::dsgd, AlgorithmKind::walkman};
  double lambda = 1.0;
  RegVariant variant = RegVariant::l2;
  std::int64_t budget = 10000;  // unit-message budget
  std::int64_t max_iters = 0;   // when > 0, overrides the unit budget
  int repeats = 100;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  long eval_stride = 10;
  long ref_iters = 200000;
  double ref_tol = 1e-6;  // relative self-consistency tolerance for H*
  double sigma = 0.01;
  double tau = 0.0;
  double alpha0 = 0.01;        // randomedge / blockprox: alpha0 / sqrt(t+1)
  bool rho_auto = true;        // admm: 1e-4 + sqrt(lambda / 2) when auto
  double rho = 0.0;
  double dsgd_step = 0.01;     // dsgd and proxavg step size
  double walkman_beta = 10000.0;
  int jobs = 0;  // 0: use BLOCKPROX_JOBS env var, else 1
  bool shared_instance = true;  // one instance per repeat shared by algorithms
  bool save_instances = false;  // also write data/graph files per repeat

  double resolved_rho() const {
    return rho_auto ? 1e-4 + std::sqrt(lambda / 2.0) : rho;
  }

  int resolved_jobs() const {
    if (jobs > 0) return jobs;
    if (const char* env = std::getenv("BLOCKPROX_JOBS")) {
      int v = std::atoi(env);
      if (v > 0) return v;
    }
    return 1;
  }

  std::vector<int> group_sizes() const {
    switch (setting) {
      case Setting::sbm_i: return {10, 17, 18, 18, 12};
      case Setting::sbm_ii: return {20};
      case Setting::sbm_iii: return {40};
      case Setting::custom: return {};
    }
    return {};
  }
  double p_in() const { return setting == Setting::sbm_iii ? 1.0 : 0.5; }
  double p_out() const { return setting == Setting::sbm_iii ? 1.0 : 0.01; }
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

[[noreturn]] inline void bad_value(const std::string& key,
                                   const std::string& value,
                                   const std::string& allowed) {
  throw std::invalid_argument("config key '" + key + "': unparseable value '" +
                              value + "' (expected " + allowed + ")");
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) bad_value(key, v, "a real number");
    return x;
  } catch (const std::invalid_argument&) {
    bad_value(key, v, "a real number");
  } catch (const std::out_of_range&) {
    bad_value(key, v, "a real number");
  }
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long long x = std::stoll(v, &pos);
    if (pos != v.size()) bad_value(key, v, "an integer");
    return x;
  } catch (const std::invalid_argument&) {
    bad_value(key, v, "an integer");
  } catch (const std::out_of_range&) {
    bad_value(key, v, "an integer");
  }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) bad_value(key, v, "a non-negative integer");
    return x;
  } catch (const std::invalid_argument&) {
    bad_value(key, v, "a non-negative integer");
  } catch (const std::out_of_range&) {
    bad_value(key, v, "a non-negative integer");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true|false");
}

inline AlgorithmKind parse_algorithm(const std::string& key,
                                     const std::string& v) {
  if (v == "randomedge") return AlgorithmKind::randomedge;
  if (v == "blockprox") return AlgorithmKind::blockprox;
  if (v == "admm") return AlgorithmKind::admm;
  if (v == "proxavg") return AlgorithmKind::proxavg;
  if (v == "dsgd") return AlgorithmKind::dsgd;
  if (v == "walkman") return AlgorithmKind::walkman;
  bad_value(key, v, "randomedge|blockprox|admm|proxavg|dsgd|walkman");
}

}  // namespace detail

// Applies one key = value assignment. Shared by the file reader and the
// flag-override path so both report errors identically.
inline void apply_config_entry(RunConfig& cfg, const std::string& key,
                               const std::string& value) {
  using namespace detail;
  if (key == "experiment") {
    cfg.experiment = value;
  } else if (key == "setting") {
    if (value == "sbm_i") cfg.setting = Setting::sbm_i;
    else if (value == "sbm_ii") cfg.setting = Setting::sbm_ii;
    else if (value == "sbm_iii") cfg.setting = Setting::sbm_iii;
    else if (value == "custom") cfg.setting = Setting::custom;
    else bad_value(key, value, "sbm_i|sbm_ii|sbm_iii|custom");
  } else if (key == "data_file") {
    cfg.data_file = value;
  } else if (key == "graph_file") {
    cfg.graph_file = value;
  } else if (key == "algorithms") {
    cfg.algorithms.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) cfg.algorithms.push_back(parse_algorithm(key, item));
    }
    if (cfg.algorithms.empty()) bad_value(key, value, "a comma-separated list");
  } else if (key == "lambda") {
    cfg.lambda = parse_double(key, value);
    if (cfg.lambda < 0.0) bad_value(key, value, "lambda >= 0");
  } else if (key == "variant") {
    if (value == "l2") cfg.variant = RegVariant::l2;
    else if (value == "l1") cfg.variant = RegVariant::l1;
    else bad_value(key, value, "l2|l1");
  } else if (key == "budget") {
    cfg.budget = parse_int(key, value);
    if (cfg.budget <= 0) bad_value(key, value, "budget > 0");
  } else if (key == "max_iters") {
    cfg.max_iters = parse_int(key, value);
    if (cfg.max_iters < 0) bad_value(key, value, "max_iters >= 0");
  } else if (key == "repeats") {
    cfg.repeats = static_cast<int>(parse_int(key, value));
    if (cfg.repeats < 1) bad_value(key, value, "repeats >= 1");
  } else if (key == "seed") {
    cfg.seed = parse_uint(key, value);
  } else if (key == "out_dir") {
    cfg.out_dir = value;
  } else if (key == "eval_stride") {
    cfg.eval_stride = parse_int(key, value);
    if (cfg.eval_stride < 1) bad_value(key, value, "eval_stride >= 1");
  } else if (key == "ref_iters") {
    cfg.ref_iters = parse_int(key, value);
    if (cfg.ref_iters < 1) bad_value(key, value, "ref_iters >= 1");
  } else if (key == "ref_tol") {
    cfg.ref_tol = parse_double(key, value);
    if (cfg.ref_tol <= 0.0) bad_value(key, value, "ref_tol > 0");
  } else if (key == "sigma") {
    cfg.sigma = parse_double(key, value);
    if (cfg.sigma < 0.0) bad_value(key, value, "sigma >= 0");
  } else if (key == "tau") {
    cfg.tau = parse_double(key, value);
    if (cfg.tau < 0.0) bad_value(key, value, "tau >= 0");
  } else if (key == "alpha0") {
    cfg.alpha0 = parse_double(key, value);
    if (cfg.alpha0 <= 0.0) bad_value(key, value, "alpha0 > 0");
  } else if (key == "rho") {
    if (value == "auto") {
      cfg.rho_auto = true;
    } else {
      cfg.rho = parse_double(key, value);
      cfg.rho_auto = false;
      if (cfg.rho <= 0.0) bad_value(key, value, "rho > 0 or auto");
    }
  } else if (key == "dsgd_step") {
    cfg.dsgd_step = parse_double(key, value);
    if (cfg.dsgd_step <= 0.0) bad_value(key, value, "dsgd_step > 0");
  } else if (key == "walkman_beta") {
    cfg.walkman_beta = parse_double(key, value);
    if (cfg.walkman_beta <= 0.0) bad_value(key, value, "walkman_beta > 0");
  } else if (key == "jobs") {
    cfg.jobs = static_cast<int>(parse_int(key, value));
    if (cfg.jobs < 0) bad_value(key, value, "jobs >= 0");
  } else if (key == "shared_instance") {
    cfg.shared_instance = parse_bool(key, value);
  } else if (key == "save_instances") {
    cfg.save_instances = parse_bool(key, value);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

inline void apply_config_text(RunConfig& cfg, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + t + "'");
    std::string key = detail::trim(t.substr(0, eq));
    std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": missing key");
    apply_config_entry(cfg, key, value);
  }
}

// Resolves a config from an optional file plus ordered flag overrides;
// overrides win over file values.
inline RunConfig parse_config(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  RunConfig cfg;
  if (!path.empty()) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    apply_config_text(cfg, f);
  }
  for (const auto& [key, value] : overrides) apply_config_entry(cfg, key, value);
  if (cfg.setting == Setting::custom &&
      (cfg.data_file.empty() || cfg.graph_file.empty()))
    throw std::invalid_argument(
        "config: setting = custom requires keys 'data_file' and 'graph_file'");
  return cfg;
}

inline const char* setting_name(Setting s) {
  switch (s) {
    case Setting::sbm_i: return "sbm_i";
    case Setting::sbm_ii: return "sbm_ii";
    case Setting::sbm_iii: return "sbm_iii";
    case Setting::custom: return "custom";
  }
  return "?";
}

// Full echo of the resolved config; the output parses back into the same
// config, so a manifest alone reproduces a run.
inline std::string config_to_manifest(const RunConfig& cfg) {
  std::string out;
  out += "experiment = " + cfg.experiment + "\n";
  out += std::string("setting = ") + setting_name(cfg.setting) + "\n";
  if (!cfg.data_file.empty()) out += "data_file = " + cfg.data_file + "\n";
  if (!cfg.graph_file.empty()) out += "graph_file = " + cfg.graph_file + "\n";
  out += "algorithms = ";
  for (std::size_t i = 0; i < cfg.algorithms.size(); ++i) {
    if (i) out += ",";
    out += algorithm_name(cfg.algorithms[i]);
  }
  out += "\n";
  out += "lambda = " + format_double(cfg.lambda) + "\n";
  out += std::string("variant = ") + variant_name(cfg.variant) + "\n";
  out += "budget = " + std::to_string(cfg.budget) + "\n";
  out += "max_iters = " + std::to_string(cfg.max_iters) + "\n";
  out += "repeats = " + std::to_string(cfg.repeats) + "\n";
  out += "seed = " + std::to_string(cfg.seed) + "\n";
  out += "out_dir = " + cfg.out_dir + "\n";
  out += "eval_stride = " + std::to_string(cfg.eval_stride) + "\n";
  out += "ref_iters = " + std::to_string(cfg.ref_iters) + "\n";
  out += "ref_tol = " + format_double(cfg.ref_tol) + "\n";
  out += "sigma = " + format_double(cfg.sigma) + "\n";
  out += "tau = " + format_double(cfg.tau) + "\n";
  out += "alpha0 = " + format_double(cfg.alpha0) + "\n";
  out += "rho = " + format_double(cfg.resolved_rho()) + "\n";
  out += "dsgd_step = " + format_double(cfg.dsgd_step) + "\n";
  out += "walkman_beta = " + format_double(cfg.walkman_beta) + "\n";
  out += "jobs = " + std::to_string(cfg.jobs) + "\n";
  out += std::string("shared_instance = ") +
         (cfg.shared_instance ? "true" : "false") + "\n";
  out += std::string("save_instances = ") +
         (cfg.save_instances ? "true" : "false") + "\n";
  return out;
}

}  // namespace blockprox
