#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>

#include "gcpinn/config.hpp"
#include "gcpinn/errors.hpp"
#include "gcpinn/experiment.hpp"

using namespace gcpinn;

namespace {

struct RunFlags {
  std::string config_path;
  std::optional<std::string> benchmark, method, preset, out;
  std::optional<double> alpha, beta;
  std::optional<std::uint64_t> seed;
  std::optional<long> adam_epochs;
  std::optional<int> lbfgs_steps, workers;
  bool train_mapping = false;
  bool tuned = false;
};

void add_run_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--config", f.config_path, "JSON run configuration (flags override it)");
  app->add_option("--benchmark", f.benchmark, "burgers1d | convdiff1d | helmholtz1d | convdiff2d | ns2d");
  app->add_option("--method", f.method,
                  "pinn | ff | sa | rar | gpinn | gc-torus | gc-radial | gc-local | gc-pwl | gc-saturating");
  app->add_option("--alpha", f.alpha, "radial mapping strength");
  app->add_option("--beta", f.beta, "local stretch strength");
  app->add_flag("--train-mapping", f.train_mapping, "train radial/local mapping parameters jointly");
  app->add_flag("--tuned", f.tuned, "use the per-benchmark optimal alpha and beta");
  app->add_option("--seed", f.seed, "model and sampling seed");
  app->add_option("--preset", f.preset, "full | desk");
  app->add_option("--adam-epochs", f.adam_epochs, "Adam iterations");
  app->add_option("--lbfgs-steps", f.lbfgs_steps, "L-BFGS iterations");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--workers", f.workers, "threads for batch evaluation");
}

RunConfig resolve(const RunFlags& f, const std::string& default_method = {}) {
  nlohmann::json j = nlohmann::json::object();
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw ConfigError("cannot open config file '" + f.config_path + "'");
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file '" + f.config_path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
  }
  if (!default_method.empty() && !j.contains("method")) j["method"] = default_method;
  if (f.benchmark) j["benchmark"] = *f.benchmark;
  if (f.method) j["method"] = *f.method;
  if (f.preset) j["preset"] = *f.preset;
  if (f.out) j["out"] = *f.out;
  if (f.alpha) j["alpha"] = *f.alpha;
  if (f.beta) j["beta"] = *f.beta;
  if (f.seed) j["seed"] = *f.seed;
  if (f.adam_epochs) j["adam_epochs"] = *f.adam_epochs;
  if (f.lbfgs_steps) j["lbfgs_steps"] = *f.lbfgs_steps;
  if (f.workers) j["workers"] = *f.workers;
  if (f.train_mapping) j["train_mapping"] = true;
  if (f.tuned) j["tuned"] = true;
  return config_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric-compactification PINN experiments"};
  app.require_subcommand(1);

  RunFlags run_flags, sweep_flags, ntk_flags;
  auto* run = app.add_subcommand("run", "train and evaluate one configuration");
  add_run_flags(run, run_flags);

  auto* sweep = app.add_subcommand("sweep", "sweep alpha or beta and tabulate metrics");
  add_run_flags(sweep, sweep_flags);
  std::string parameter;
  std::vector<double> values;
  sweep->add_option("--param", parameter, "alpha | beta")->required();
  sweep->add_option("--values", values, "comma-separated values")->required()->delimiter(',');

  auto* check = app.add_subcommand("check", "run the property suites");
  std::string suite = "all";
  check->add_option("--suite", suite, "derivative | mapping | mms | amplification | all");

  auto* ntk = app.add_subcommand("ntk", "train with residual-NTK snapshots");
  add_run_flags(ntk, ntk_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(resolve(run_flags), std::cout, std::cerr);
    if (*sweep) {
      const std::string method = parameter == "alpha" || parameter == "beta" ? sweep_method(parameter) : "";
      return cmd_sweep(resolve(sweep_flags, method), parameter, values, std::cout, std::cerr);
    }
    if (*check) return cmd_check(suite, std::cout);
    if (*ntk) return cmd_ntk(resolve(ntk_flags), std::cout, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
