#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dalloy/config.hpp"

using namespace dalloy;
using nlohmann::json;

namespace {

bool fails_mentioning(const json& root, const std::string& needle) {
  try {
    parse_config_json(root);
  } catch (const Error& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("defaults are materialized from an empty config") {
  const ExperimentConfig cfg = parse_config_json(json::object());
  REQUIRE(cfg.samples == 10000);
  REQUIRE(cfg.seed == 20260822);
  REQUIRE(cfg.workers == 0);
  REQUIRE(cfg.potential.dim == 1);
  REQUIRE(cfg.potential.entries.size() == 1);
  REQUIRE(cfg.density.kind == "uniform");
  // spectral window for the delta potential with uniform[0,1] couplings is [-2,3]
  REQUIRE(cfg.wegner.energies.size() == 9);
  REQUIRE(cfg.wegner.energies.front() == Catch::Approx(-2.0));
  REQUIRE(cfg.wegner.energies.back() == Catch::Approx(3.0));
  REQUIRE(cfg.wegner.mode == "auto");
  REQUIRE(cfg.moments.zs.size() == 5);
  REQUIRE(cfg.moments.zs.front().imag() == Catch::Approx(1e-3));
  REQUIRE(cfg.moments.zs.back().imag() == Catch::Approx(1.0));
  REQUIRE(cfg.moments.pairs.size() == 10);
  REQUIRE(cfg.decay.anchors == std::vector<int>{120, 180, 240});
  REQUIRE(cfg.decay.z.imag() == Catch::Approx(0.01));
  REQUIRE(cfg.krein.z.imag() == Catch::Approx(0.5));
  REQUIRE(cfg.counterexample.raw_samples == 1000000);
}

TEST_CASE("canonical json round trips to an equal config") {
  ExperimentConfig cfg = parse_config_json(json::object());
  REQUIRE(parse_config_json(config_to_json(cfg)) == cfg);

  json custom = {
      {"potential", {{"dim", 1}, {"entries", {{{0}, 1.0}, {{1}, -0.5}}}}},
      {"density", {{"kind", "triangular"}, {"a", -1.0}, {"b", 2.0}}},
      {"experiment",
       {{"samples", 500},
        {"seed", 7},
        {"wegner", {{"box_sizes", {4, 6}}, {"epsilons", {0.01, 0.1}}, {"mode", "shapefit"}}},
        {"moments", {{"s", 0.3}, {"box_size", 20}}},
        {"decay", {{"chain_length", 80}, {"anchors", {24, 36, 48}}}},
        {"krein", {{"z", {0.5, 0.25}}}}}}};
  const ExperimentConfig parsed = parse_config_json(custom);
  REQUIRE(parsed.samples == 500);
  REQUIRE(parsed.potential.entries.size() == 2);
  REQUIRE(parsed.wegner.mode == "shapefit");
  REQUIRE(parsed.krein.z == std::complex<double>(0.5, 0.25));
  REQUIRE(parse_config_json(config_to_json(parsed)) == parsed);
}

TEST_CASE("piecewise-linear densities parse and echo canonically") {
  json root = {{"density",
                {{"kind", "piecewise-linear"},
                 {"breakpoints", {0.0, 0.2, 1.0}},
                 {"values", {0.0, 2.5, 0.0}}}}};
  const ExperimentConfig cfg = parse_config_json(root);
  REQUIRE(cfg.density.kind == "piecewise-linear");
  REQUIRE(cfg.density.a == Catch::Approx(0.0));
  REQUIRE(cfg.density.b == Catch::Approx(1.0));
  REQUIRE(parse_config_json(config_to_json(cfg)) == cfg);
}

TEST_CASE("unknown keys are rejected by name") {
  REQUIRE(fails_mentioning({{"bogus_top", 1}}, "bogus_top"));
  REQUIRE(fails_mentioning({{"experiment", {{"wegner", {{"epsilon", 0.1}}}}}}, "epsilon"));
  REQUIRE(fails_mentioning({{"density", {{"stddev", 1.0}}}}, "stddev"));
}

TEST_CASE("validation errors name the offending field") {
  REQUIRE(fails_mentioning({{"experiment", {{"samples", 50}}}}, "samples"));
  REQUIRE(fails_mentioning({{"experiment", {{"workers", 300}}}}, "workers"));
  REQUIRE(fails_mentioning({{"experiment", {{"moments", {{"s", 1.5}}}}}}, "s"));
  REQUIRE(fails_mentioning({{"experiment", {{"wegner", {{"epsilons", {0.1, 0.01}}}}}}},
                           "epsilons"));
  REQUIRE(fails_mentioning({{"experiment", {{"decay", {{"z", {0.5, 0.0}}}}}}}, "z"));
  REQUIRE(fails_mentioning({{"experiment", {{"counterexample", {{"a_values", {0.0}}}}}}},
                           "a_values"));
  REQUIRE(fails_mentioning({{"experiment", {{"counterexample", {{"raw_samples", 10}}}}}},
                           "raw_samples"));
  REQUIRE(fails_mentioning({{"density", {{"kind", "gaussian"}}}}, "gaussian"));
  REQUIRE(fails_mentioning({{"potential", {{"dim", 0}}}}, "dim"));
}

TEST_CASE("warnings flag heavy-tailed moment exponents") {
  std::vector<std::string> warnings;
  json root = {{"experiment", {{"moments", {{"s", 0.6}}}}}};
  parse_config_json(root, &warnings);
  REQUIRE(warnings.size() == 1);
  REQUIRE(warnings.front().find("0.6") != std::string::npos);
}

TEST_CASE("config io round trips through a file") {
  const ExperimentConfig cfg = parse_config_json(json::object());
  const std::string path = "/tmp/dalloy_test_config.json";
  {
    std::ofstream out(path);
    out << config_to_json(cfg).dump(2);
  }
  REQUIRE(parse_config(path) == cfg);
  REQUIRE_THROWS_AS(parse_config("/nonexistent/nope.json"), Error);
}
