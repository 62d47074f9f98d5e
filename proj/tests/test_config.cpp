#include <catch2/catch_amalgamated.hpp>

#include "blockprox/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace blockprox;

namespace {

std::string write_config(const std::string& text) {
  auto path = std::filesystem::temp_directory_path() / "bp_test_config.txt";
  std::ofstream f(path, std::ios::trunc);
  f << text;
  return path.string();
}

}  // namespace

TEST_CASE("defaults materialize without any input") {
  RunConfig cfg = parse_config("");
  REQUIRE(cfg.setting == Setting::sbm_i);
  REQUIRE(cfg.lambda == 1.0);
  REQUIRE(cfg.budget == 10000);
  REQUIRE(cfg.repeats == 100);
  REQUIRE(cfg.variant == RegVariant::l2);
  REQUIRE(cfg.alpha0 == 0.01);
  REQUIRE(cfg.dsgd_step == 0.01);
  REQUIRE(cfg.walkman_beta == 10000.0);
  REQUIRE(cfg.group_sizes() == std::vector<int>{10, 17, 18, 18, 12});
  REQUIRE(cfg.p_in() == 0.5);
  REQUIRE(cfg.p_out() == 0.01);
}

TEST_CASE("rho defaults to 1e-4 + sqrt(lambda / 2)") {
  RunConfig cfg = parse_config("");
  REQUIRE(cfg.resolved_rho() ==
          Catch::Approx(1e-4 + std::sqrt(0.5)).margin(1e-15));
  RunConfig cfg2 = parse_config("", {{"lambda", "2"}});
  REQUIRE(cfg2.resolved_rho() == Catch::Approx(1e-4 + 1.0).margin(1e-15));
  RunConfig cfg3 = parse_config("", {{"rho", "0.25"}});
  REQUIRE(cfg3.resolved_rho() == 0.25);
}

TEST_CASE("flag overrides beat file values") {
  std::string path = write_config(
      "# benchmark setup\n"
      "repeats = 40\n"
      "lambda = 2.5\n"
      "setting = sbm_ii\n");
  RunConfig cfg = parse_config(path, {{"repeats", "5"}});
  REQUIRE(cfg.repeats == 5);
  REQUIRE(cfg.lambda == 2.5);
  REQUIRE(cfg.setting == Setting::sbm_ii);
}

TEST_CASE("errors name the offending key") {
  REQUIRE_THROWS_WITH(parse_config("", {{"variant", "l3"}}),
                      Catch::Matchers::ContainsSubstring("variant") &&
                          Catch::Matchers::ContainsSubstring("l2|l1"));
  REQUIRE_THROWS_WITH(parse_config("", {{"no_such_key", "1"}}),
                      Catch::Matchers::ContainsSubstring("no_such_key"));
  REQUIRE_THROWS_WITH(parse_config("", {{"budget", "ten"}}),
                      Catch::Matchers::ContainsSubstring("budget"));
  REQUIRE_THROWS_WITH(parse_config("", {{"budget", "-3"}}),
                      Catch::Matchers::ContainsSubstring("budget"));
  std::string path = write_config("lambda 2.5\n");
  REQUIRE_THROWS_WITH(parse_config(path),
                      Catch::Matchers::ContainsSubstring("key = value"));
}

TEST_CASE("custom setting requires both files") {
  REQUIRE_THROWS_WITH(parse_config("", {{"setting", "custom"}}),
                      Catch::Matchers::ContainsSubstring("data_file"));
  RunConfig cfg = parse_config("", {{"setting", "custom"},
                                    {"data_file", "d.csv"},
                                    {"graph_file", "g.txt"}});
  REQUIRE(cfg.data_file == "d.csv");
}

TEST_CASE("algorithm list parses and rejects unknown names") {
  RunConfig cfg = parse_config("", {{"algorithms", "randomedge, walkman"}});
  REQUIRE(cfg.algorithms ==
          std::vector<AlgorithmKind>{AlgorithmKind::randomedge,
                                     AlgorithmKind::walkman});
  REQUIRE_THROWS_WITH(parse_config("", {{"algorithms", "sgd"}}),
                      Catch::Matchers::ContainsSubstring("randomedge|"));
}

TEST_CASE("manifest echo parses back to an identical manifest") {
  RunConfig cfg = parse_config("", {{"repeats", "7"},
                                    {"seed", "123"},
                                    {"variant", "l1"},
                                    {"lambda", "0.3"},
                                    {"algorithms", "randomedge,admm"}});
  std::string manifest = config_to_manifest(cfg);
  std::stringstream ss(manifest);
  RunConfig back;
  apply_config_text(back, ss);
  REQUIRE(config_to_manifest(back) == manifest);
  REQUIRE(back.repeats == 7);
  REQUIRE(back.seed == 123);
  REQUIRE(back.variant == RegVariant::l1);
}

TEST_CASE("jobs fall back to the environment variable") {
  RunConfig cfg = parse_config("");
  ::setenv("BLOCKPROX_JOBS", "3", 1);
  REQUIRE(cfg.resolved_jobs() == 3);
  ::unsetenv("BLOCKPROX_JOBS");
  REQUIRE(cfg.resolved_jobs() == 1);
  RunConfig explicit_jobs = parse_config("", {{"jobs", "2"}});
  REQUIRE(explicit_jobs.resolved_jobs() == 2);
}
