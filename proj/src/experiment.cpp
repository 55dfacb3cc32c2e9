#include "gcpinn/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "gcpinn/checks.hpp"
#include "gcpinn/errors.hpp"

namespace gcpinn {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kNtkStream = 0x6e746b706f696e74ULL;  // "ntkpoint"

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  return f;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_spectrum(const fs::path& path, const RunConfig& c, const NtkReport& r) {
  auto f = open_out(path);
  f << provenance_line(c) << '\n' << "index,eigenvalue\n";
  for (int i = 0; i < r.eigenvalues.size(); ++i) f << i << ',' << fmt(r.eigenvalues[i]) << '\n';
}

void write_kernel(const fs::path& path, const RunConfig& c, const NtkReport& r) {
  auto f = open_out(path);
  f << provenance_line(c) << '\n';
  for (int i = 0; i < r.kernel.rows(); ++i) {
    for (int j = 0; j < r.kernel.cols(); ++j) f << (j ? "," : "") << fmt(r.kernel(i, j));
    f << '\n';
  }
}

}  // namespace

std::string provenance_line(const RunConfig& config) {
  nlohmann::json j;
  j["config"] = config_to_json(config);
  j["seed"] = config.seed;
  return "# " + j.dump();
}

RunOutcome run_experiment(const RunConfig& c, const fs::path& dir, bool with_ntk, std::ostream* progress) {
  validate(c);
  const auto start = std::chrono::steady_clock::now();
  const PdeBenchmark bench = PdeBenchmark::make(c.benchmark);
  const Method method = parse_method(c.method);
  Model model = build_model(method, bench, method_options(c), c.seed);
  fs::create_directories(dir);

  const TestSet monitor = make_test_set(bench, c.n_test, c.test_seeds.front());
  auto test_error = [&](const Model& m) { return evaluate_on(m, bench, monitor).headline.rel_l2; };
  Trainer trainer(model, bench, make_schedule(c), test_error);

  RunOutcome outcome;
  Eigen::MatrixXd ntk_points;
  if (with_ntk) {
    Rng rng(c.seed ^ kNtkStream);
    ntk_points = bench.sample_interior(c.ntk_points, rng);
  }
  trainer.set_snapshot_hook([&](long step, const std::string& stage) {
    if (progress) {
      *progress << "[" << c.benchmark << "/" << c.method << "] " << stage << " step " << step;
      if (!trainer.log().empty()) *progress << " loss " << trainer.log().back().loss.total;
      *progress << std::endl;
    }
    if (!with_ntk) return;
    const NtkReport r = ntk_matrix(model, bench, ntk_points, c.workers);
    outcome.ntk.push_back({step, stage, r.effective_rank, r.eigenvalues.size() ? r.eigenvalues[0] : 0.0,
                           r.kernel.trace()});
    write_spectrum(dir / ("ntk_spectrum_" + std::to_string(step) + ".csv"), c, r);
    if (step == 0 || stage == "final") write_kernel(dir / ("ntk_kernel_" + std::to_string(step) + ".csv"), c, r);
  });

  trainer.run_adam_stage();
  outcome.lbfgs = trainer.run_lbfgs_stage();
  outcome.log = trainer.log();
  outcome.report = compute_metrics(model, bench, c.n_test, c.test_seeds);
  outcome.parameter_count = model.parameter_count();
  outcome.reported_parameter_count = reported_parameter_count(method, model);
  outcome.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  {
    auto f = open_out(dir / "convergence.csv");
    f << provenance_line(c) << '\n';
    write_convergence_csv(f, outcome.log);
  }
  {
    nlohmann::json j;
    j["config"] = config_to_json(c);
    j["seed"] = c.seed;
    j["metrics"] = report_to_json(outcome.report);
    j["rel_l2"] = outcome.report.mean.rel_l2;
    j["mse"] = outcome.report.mean.mse;
    j["rel_h1"] = outcome.report.mean.rel_h1;
    j["parameter_count"] = outcome.parameter_count;
    j["reported_parameter_count"] = outcome.reported_parameter_count;
    j["lbfgs"] = {{"iterations", outcome.lbfgs.iterations},
                  {"evaluations", outcome.lbfgs.evaluations},
                  {"loss", outcome.lbfgs.loss},
                  {"stop_reason", outcome.lbfgs.stop_reason}};
    j["final_loss"] = outcome.log.empty() ? 0.0 : outcome.log.back().loss.total;
    j["wall_seconds"] = outcome.wall_seconds;
    auto f = open_out(dir / "metrics.json");
    f << std::setw(2) << j << '\n';
  }
  {
    nlohmann::json j;
    j["config"] = config_to_json(c);
    j["seed"] = c.seed;
    j["model"] = model_to_json(model);
    j["strategy"] = {{"log_w_res", trainer.state().log_w_res},
                     {"log_w_bc", trainer.state().log_w_bc},
                     {"pool_size", trainer.state().pool.size()}};
    auto f = open_out(dir / "checkpoint.json");
    f << j.dump() << '\n';
  }
  if (with_ntk) {
    auto f = open_out(dir / "ntk_effective_rank.csv");
    f << provenance_line(c) << '\n' << "step,stage,effective_rank,lambda_max,trace\n";
    for (const auto& s : outcome.ntk) {
      f << s.step << ',' << s.stage << ',' << fmt(s.effective_rank) << ',' << fmt(s.lambda_max) << ','
        << fmt(s.trace) << '\n';
    }
  }
  return outcome;
}

std::string sweep_method(const std::string& parameter) {
  if (parameter == "alpha") return "gc-radial";
  if (parameter == "beta") return "gc-local";
  throw ConfigError("sweep parameter must be alpha or beta, got '" + parameter + "'");
}

std::vector<SweepRow> run_sweep(RunConfig c, const std::string& parameter, const std::vector<double>& values,
                                std::ostream* progress) {
  const std::string method = sweep_method(parameter);
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (c.method != method) {
    throw ConfigError("sweeping " + parameter + " requires method " + method + " (got " + c.method + ")");
  }
  for (double v : values) {
    if (!(v > 0.0)) throw ConfigError(parameter + " values must be positive");
  }
  const fs::path root = c.out;
  fs::create_directories(root);
  std::vector<SweepRow> rows;
  for (double v : values) {
    RunConfig rc = c;
    (parameter == "alpha" ? rc.alpha : rc.beta) = v;
    std::ostringstream sub;
    sub << parameter << "_" << v;
    rc.out = (root / sub.str()).string();
    const RunOutcome o = run_experiment(rc, rc.out, false, progress);
    rows.push_back({v, o.report.mean});
  }
  auto f = open_out(root / "sweep.csv");
  f << provenance_line(c) << '\n' << parameter << ",mse,rel_l2,rel_h1\n";
  for (const auto& r : rows) {
    f << fmt(r.value) << ',' << fmt(r.metrics.mse) << ',' << fmt(r.metrics.rel_l2) << ',' << fmt(r.metrics.rel_h1)
      << '\n';
  }
  return rows;
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const RunOutcome o = run_experiment(config, config.out, false, &err);
  nlohmann::json j = report_to_json(o.report);
  j["rel_l2"] = o.report.mean.rel_l2;
  j["out"] = config.out;
  out << j.dump(2) << '\n';
  return 0;
}

int cmd_sweep(const RunConfig& config, const std::string& parameter, const std::vector<double>& values,
              std::ostream& out, std::ostream& err) {
  const auto rows = run_sweep(config, parameter, values, &err);
  out << parameter << ",mse,rel_l2,rel_h1\n";
  for (const auto& r : rows) {
    out << fmt(r.value) << ',' << fmt(r.metrics.mse) << ',' << fmt(r.metrics.rel_l2) << ',' << fmt(r.metrics.rel_h1)
        << '\n';
  }
  return 0;
}

int cmd_check(const std::string& suite, std::ostream& out) {
  const auto results = run_checks(suite);
  bool ok = true;
  for (const auto& r : results) ok = ok && r.passed;
  nlohmann::json j;
  j["suite"] = suite;
  j["passed"] = ok;
  j["results"] = checks_to_json(results);
  out << j.dump(2) << '\n';
  return ok ? 0 : 1;
}

int cmd_ntk(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const RunOutcome o = run_experiment(config, config.out, true, &err);
  nlohmann::json j;
  j["rel_l2"] = o.report.mean.rel_l2;
  j["trajectory"] = nlohmann::json::array();
  for (const auto& s : o.ntk) j["trajectory"].push_back({{"step", s.step}, {"stage", s.stage}, {"effective_rank", s.effective_rank}});
  out << j.dump(2) << '\n';
  return 0;
}

}  // namespace gcpinn
