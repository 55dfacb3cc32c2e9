#include "gcpinn/config.hpp"

#include <fstream>
#include <set>

#include "gcpinn/benchmark.hpp"
#include "gcpinn/errors.hpp"

namespace gcpinn {

namespace {

template <class T>
T get(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

void apply_preset(RunConfig& c, const std::string& preset) {
  if (preset == "full") {
    c.adam_epochs = 6000;
    c.adam_points = 3000;
    c.lbfgs_steps = 500;
    c.lbfgs_points = 15000;
  } else if (preset == "desk") {
    c.adam_epochs = 2000;
    c.adam_points = 1000;
    c.lbfgs_steps = 200;
    c.lbfgs_points = 4000;
  } else {
    throw ConfigError("unknown preset '" + preset + "' (expected full or desk)");
  }
  c.preset = preset;
}

void apply_tuned_mapping(RunConfig& c) {
  if (c.benchmark == "burgers1d") {
    c.alpha = 50.0;
    c.beta = 20.0;
  } else if (c.benchmark == "convdiff1d") {
    c.alpha = 20.0;
    c.beta = 50.0;
  } else if (c.benchmark == "ns2d") {
    c.alpha = 20.0;
    c.beta = 40.0;
  }
}

RunConfig apply_config(RunConfig c, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "benchmark", "method",       "alpha",           "beta",      "train_mapping", "tuned",     "seed",
      "preset",    "adam_epochs",  "adam_points",     "lbfgs_steps", "lbfgs_points", "boundary_points",
      "bc_weight", "reg_coeff",    "n_test",          "test_seeds", "ntk_points",   "ntk_every", "workers",
      "out",       "sampler"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  if (j.contains("preset")) apply_preset(c, get<std::string>(j, "preset"));
  if (j.contains("benchmark")) c.benchmark = get<std::string>(j, "benchmark");
  if (j.contains("method")) c.method = get<std::string>(j, "method");
  if (j.contains("tuned")) c.tuned = get<bool>(j, "tuned");
  if (c.tuned) apply_tuned_mapping(c);
  if (j.contains("alpha")) c.alpha = get<double>(j, "alpha");
  if (j.contains("beta")) c.beta = get<double>(j, "beta");
  if (j.contains("train_mapping")) c.train_mapping = get<bool>(j, "train_mapping");
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed");
  if (j.contains("adam_epochs")) c.adam_epochs = get<long>(j, "adam_epochs");
  if (j.contains("adam_points")) c.adam_points = get<int>(j, "adam_points");
  if (j.contains("lbfgs_steps")) c.lbfgs_steps = get<int>(j, "lbfgs_steps");
  if (j.contains("lbfgs_points")) c.lbfgs_points = get<int>(j, "lbfgs_points");
  if (j.contains("boundary_points")) c.boundary_points = get<int>(j, "boundary_points");
  if (j.contains("bc_weight")) c.bc_weight = get<double>(j, "bc_weight");
  if (j.contains("reg_coeff")) c.reg_coeff = get<double>(j, "reg_coeff");
  if (j.contains("n_test")) c.n_test = get<int>(j, "n_test");
  if (j.contains("test_seeds")) c.test_seeds = get<std::vector<std::uint64_t>>(j, "test_seeds");
  if (j.contains("ntk_points")) c.ntk_points = get<int>(j, "ntk_points");
  if (j.contains("ntk_every")) c.ntk_every = get<long>(j, "ntk_every");
  if (j.contains("workers")) c.workers = get<int>(j, "workers");
  if (j.contains("out")) c.out = get<std::string>(j, "out");
  if (j.contains("sampler")) c.sampler = get<std::string>(j, "sampler");
  validate(c);
  return c;
}

RunConfig config_from_json(const nlohmann::json& j) { return apply_config(RunConfig{}, j); }

nlohmann::json config_to_json(const RunConfig& c) {
  // preset and tuned are recorded but the resolved values are explicit, so
  // re-parsing reproduces the same configuration
  nlohmann::json j;
  j["preset"] = c.preset;
  j["benchmark"] = c.benchmark;
  j["method"] = c.method;
  j["tuned"] = c.tuned;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["train_mapping"] = c.train_mapping;
  j["seed"] = c.seed;
  j["adam_epochs"] = c.adam_epochs;
  j["adam_points"] = c.adam_points;
  j["lbfgs_steps"] = c.lbfgs_steps;
  j["lbfgs_points"] = c.lbfgs_points;
  j["boundary_points"] = c.boundary_points;
  j["bc_weight"] = c.bc_weight;
  j["reg_coeff"] = c.reg_coeff;
  j["n_test"] = c.n_test;
  j["test_seeds"] = c.test_seeds;
  j["ntk_points"] = c.ntk_points;
  j["ntk_every"] = c.ntk_every;
  j["workers"] = c.workers;
  j["out"] = c.out;
  j["sampler"] = c.sampler;
  return j;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void validate(const RunConfig& c) {
  const auto& b = PdeBenchmark::names();
  if (std::find(b.begin(), b.end(), c.benchmark) == b.end()) throw ConfigError("unknown benchmark '" + c.benchmark + "'");
  parse_method(c.method);
  parse_sampler(c.sampler);
  if (!(c.alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(c.beta > 0.0)) throw ConfigError("beta must be positive");
  if (c.adam_epochs < 0 || c.lbfgs_steps < 0) throw ConfigError("step counts must be nonnegative");
  if (c.adam_points < 1 || c.lbfgs_points < 1 || c.boundary_points < 1) throw ConfigError("point counts must be positive");
  if (!(c.bc_weight >= 0.0) || !(c.reg_coeff >= 0.0)) throw ConfigError("loss weights must be nonnegative");
  if (c.n_test < 2) throw ConfigError("n_test must be at least 2");
  if (c.test_seeds.empty()) throw ConfigError("test_seeds must not be empty");
  if (c.ntk_points < 1 || c.ntk_points > 512) throw ConfigError("ntk_points must be in [1, 512]");
  if (c.ntk_every < 1) throw ConfigError("ntk_every must be positive");
  if (c.workers < 1) throw ConfigError("workers must be positive");
  if (c.out.empty()) throw ConfigError("out must not be empty");
}

MethodOptions method_options(const RunConfig& c) { return MethodOptions{c.alpha, c.beta, c.train_mapping}; }

TrainingSchedule make_schedule(const RunConfig& c) {
  TrainingSchedule s;
  s.seed = c.seed;
  s.adam_epochs = c.adam_epochs;
  s.adam_points = c.adam_points;
  s.lbfgs_steps = c.lbfgs_steps;
  s.lbfgs_points = c.lbfgs_points;
  s.boundary_points = c.boundary_points;
  s.bc_weight = c.bc_weight;
  s.reg_coeff = c.reg_coeff;
  s.strategy = strategy_of(parse_method(c.method));
  s.sampler = parse_sampler(c.sampler);
  s.snapshot_every = c.ntk_every;
  s.workers = c.workers;
  return s;
}

}  // namespace gcpinn
