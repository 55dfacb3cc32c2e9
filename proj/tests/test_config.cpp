#include "doctest.h"
#include "gcpinn/config.hpp"
#include "gcpinn/errors.hpp"

using namespace gcpinn;
using nlohmann::json;

TEST_CASE("defaults and round trip") {
  const RunConfig c = config_from_json(json::object());
  CHECK(c.benchmark == "helmholtz1d");
  CHECK(c.adam_epochs == 6000);
  CHECK(c.lbfgs_points == 15000);
  CHECK(c.test_seeds == std::vector<std::uint64_t>{3407, 3408, 3409});
  RunConfig d = config_from_json({{"benchmark", "ns2d"}, {"method", "gc-local"}, {"beta", 12.5}, {"seed", 11}});
  const RunConfig e = config_from_json(config_to_json(d));
  CHECK(config_to_json(e) == config_to_json(d));
  CHECK(e.beta == 12.5);
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK_THROWS_AS(config_from_json({{"lr", 1e-3}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"benchmark", "heat3d"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"method", "nope"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"alpha", -1.0}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"adam_points", "many"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"preset", "huge"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json({{"sampler", "sobol"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::array()), ConfigError);
}

TEST_CASE("preset applies before explicit budget keys") {
  const RunConfig c = config_from_json({{"adam_epochs", 10}, {"preset", "desk"}});
  CHECK(c.adam_epochs == 10);
  CHECK(c.adam_points == 1000);
  CHECK(c.lbfgs_steps == 200);
}

TEST_CASE("tuned mapping parameters") {
  RunConfig c = config_from_json({{"benchmark", "burgers1d"}, {"tuned", true}});
  CHECK(c.alpha == 50.0);
  CHECK(c.beta == 20.0);
  c = config_from_json({{"benchmark", "burgers1d"}, {"tuned", true}, {"beta", 7.0}});
  CHECK(c.beta == 7.0);
}

TEST_CASE("schedule follows the config") {
  const RunConfig c = config_from_json({{"method", "rar"}, {"sampler", "uniform"}, {"bc_weight", 5.0}, {"workers", 2}});
  const TrainingSchedule s = make_schedule(c);
  CHECK(s.strategy == Strategy::rar);
  CHECK(s.sampler == Sampler::uniform);
  CHECK(s.bc_weight == 5.0);
  CHECK(s.workers == 2);
  CHECK(s.seed == c.seed);
  CHECK(method_options(config_from_json({{"alpha", 3.0}})).alpha == 3.0);
}
