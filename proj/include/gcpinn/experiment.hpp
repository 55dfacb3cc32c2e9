#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gcpinn/config.hpp"
#include "gcpinn/evaluation.hpp"
#include "gcpinn/optim.hpp"
#include "gcpinn/training.hpp"

namespace gcpinn {

struct NtkSnapshot {
  long step = 0;
  std::string stage;
  double effective_rank = 0.0;
  double lambda_max = 0.0;
  double trace = 0.0;
};

struct RunOutcome {
  EvaluationReport report;
  std::vector<LogRow> log;
  LbfgsResult lbfgs;
  std::size_t parameter_count = 0;           // model parameters
  std::size_t reported_parameter_count = 0;  // plus strategy parameters
  std::vector<NtkSnapshot> ntk;              // empty unless requested
  double wall_seconds = 0.0;
};

/// Trains and evaluates one configuration. Writes convergence.csv,
/// metrics.json and checkpoint.json into dir (and the NTK files when
/// with_ntk is set). Every file starts with the resolved config.
RunOutcome run_experiment(const RunConfig& config, const std::filesystem::path& dir, bool with_ntk = false,
                          std::ostream* progress = nullptr);

/// Method whose mapping consumes a sweep parameter ("alpha" or "beta").
std::string sweep_method(const std::string& parameter);

struct SweepRow {
  double value = 0.0;
  MetricSet metrics;
};

/// One run per value; writes sweep.csv into config.out and each run into a subdirectory.
std::vector<SweepRow> run_sweep(RunConfig config, const std::string& parameter, const std::vector<double>& values,
                                std::ostream* progress = nullptr);

/// One-line JSON provenance block used as a CSV comment header.
std::string provenance_line(const RunConfig& config);

// Command entry points used by the CLI; they return the process exit code.
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& config, const std::string& parameter, const std::vector<double>& values,
              std::ostream& out, std::ostream& err);
int cmd_check(const std::string& suite, std::ostream& out);
int cmd_ntk(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace gcpinn
