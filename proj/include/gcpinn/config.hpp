#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcpinn/training.hpp"
#include "json.hpp"

namespace gcpinn {

/// Fully resolved experiment configuration.
///
/// JSON keys (all optional; unknown keys are rejected):
///   benchmark, method, alpha, beta, train_mapping, tuned, seed, preset,
///   adam_epochs, adam_points, lbfgs_steps, lbfgs_points, boundary_points,
///   bc_weight, reg_coeff, n_test, test_seeds, ntk_points, ntk_every,
///   workers, out, sampler ("stratified" or "uniform")
/// "preset" ("full" or "desk") is applied before the other keys of the same
/// object, so explicit budget keys override it. "tuned" replaces alpha and beta
/// with the per-benchmark sensitivity optima.
struct RunConfig {
  std::string benchmark = "helmholtz1d";
  std::string method = "pinn";
  double alpha = 20.0;
  double beta = 10.0;
  bool train_mapping = false;
  bool tuned = false;
  std::uint64_t seed = 3407;
  std::string preset = "full";
  std::string sampler = "stratified";
  long adam_epochs = 6000;
  int adam_points = 3000;
  int lbfgs_steps = 500;
  int lbfgs_points = 15000;
  int boundary_points = 400;
  double bc_weight = 100.0;
  double reg_coeff = 1e-6;
  int n_test = 2000;
  std::vector<std::uint64_t> test_seeds = {3407, 3408, 3409};
  int ntk_points = 128;
  long ntk_every = 500;
  int workers = 1;
  std::string out = "runs";
};

/// Applies the keys of j on top of base; throws ConfigError on unknown keys,
/// wrong types or invalid values.
RunConfig apply_config(RunConfig base, const nlohmann::json& j);
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_config_file(const std::string& path);

void apply_preset(RunConfig& c, const std::string& preset);
/// Per-benchmark optima for alpha and beta.
void apply_tuned_mapping(RunConfig& c);
void validate(const RunConfig& c);

MethodOptions method_options(const RunConfig& c);
TrainingSchedule make_schedule(const RunConfig& c);

}  // namespace gcpinn
