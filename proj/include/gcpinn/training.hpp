#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "gcpinn/benchmark.hpp"
#include "gcpinn/loss.hpp"
#include "gcpinn/model.hpp"
#include "gcpinn/optim.hpp"

namespace gcpinn {

enum class Method { pinn, ff, sa, rar, gpinn, gc_torus, gc_radial, gc_local, gc_pwl, gc_saturating };
enum class Strategy { vanilla, sa, rar, gpinn };
/// How fresh collocation points are drawn for the training stages.
enum class Sampler { stratified, uniform };

Sampler parse_sampler(const std::string& name);
const char* to_string(Sampler sampler);

Method parse_method(const std::string& name);
const char* to_string(Method method);
const std::vector<std::string>& method_names();
Strategy strategy_of(Method method);

struct MethodOptions {
  double alpha = 20.0;
  double beta = 10.0;
  bool train_mapping = false;
};

/// Network and mapping for a method on a benchmark, initialized from seed.
Model build_model(Method method, const PdeBenchmark& bench, const MethodOptions& options, std::uint64_t seed);
/// Trainable parameter count including strategy parameters (SA log-weights).
std::size_t reported_parameter_count(Method method, const Model& model);

struct GpinnConfig {
  double lambda = 5e-6;
  long warmup = 2000;
  long ramp = 2000;
};

struct RarConfig {
  long every = 500;
  int candidates = 8000;
  int add = 500;
  int capacity = 60000;
};

struct TrainingSchedule {
  std::uint64_t seed = 3407;
  long adam_epochs = 6000;
  int adam_points = 3000;
  double adam_lr = 1e-3;
  int lbfgs_steps = 500;
  int lbfgs_points = 15000;
  double lbfgs_lr = 1.0;
  int lbfgs_history = 50;
  int boundary_points = 400;  // 2D only; 1D always uses both endpoints
  double bc_weight = 100.0;
  double reg_coeff = 1e-6;
  Strategy strategy = Strategy::vanilla;
  Sampler sampler = Sampler::stratified;
  GpinnConfig gpinn;
  RarConfig rar;
  double sa_clip_lo = 1e-3;
  double sa_clip_hi = 1e3;
  long test_every = 100;
  long snapshot_every = 500;
  double divergence_threshold = 1e12;
  int workers = 1;
};

/// gPINN coefficient at an Adam iteration: 0 during warm-up, then a linear
/// ramp to lambda.
double gpinn_coefficient(const TrainingSchedule& schedule, long iteration);

struct StrategyState {
  double log_w_res = 0.0;
  double log_w_bc = 0.0;
  bool sa_frozen = false;
  ResidualBatch pool;  // RAR training pool
  bool pool_frozen = false;
};

struct LogRow {
  long iteration = 0;
  std::string stage;
  LossRecord loss;
  double w_res = 1.0;
  double w_bc = 0.0;
  double gpinn_coeff = 0.0;
  long pool_size = 0;
  double test_rel_l2 = std::numeric_limits<double>::quiet_NaN();
};

void write_convergence_csv(std::ostream& out, const std::vector<LogRow>& rows);

/// Two-stage optimizer driver (Adam, then L-BFGS) for one model.
class Trainer {
 public:
  using TestError = std::function<double(const Model&)>;
  /// Called with (step, stage) at Adam step 0, every snapshot_every Adam
  /// steps, and once after L-BFGS with stage "final".
  using SnapshotHook = std::function<void(long, const std::string&)>;

  Trainer(Model& model, const PdeBenchmark& bench, TrainingSchedule schedule, TestError test_error = {});

  void set_snapshot_hook(SnapshotHook hook) { hook_ = std::move(hook); }

  void run_adam_stage();
  LbfgsResult run_lbfgs_stage();

  /// Loss of the current model under the strategy at an iteration. For
  /// unfrozen SA, grad has two extra trailing entries (d/d log w_res, d/d log w_bc).
  double total_loss(const ResidualBatch& batch, const std::vector<BoundarySet>& boundary, long iteration,
                    bool lbfgs, LossRecord* record, std::span<double> grad) const;

  /// Effective (residual, boundary) weights under the current strategy state.
  std::pair<double, double> loss_weights() const;

  void set_sa_log_weights(double log_w_res, double log_w_bc) {
    state_.log_w_res = log_w_res;
    state_.log_w_bc = log_w_bc;
  }

  const std::vector<LogRow>& log() const { return log_; }
  const StrategyState& state() const { return state_; }
  const TrainingSchedule& schedule() const { return schedule_; }

 private:
  void refine_pool(Rng& rng);
  Eigen::MatrixXd draw_points(int n);
  void push_row(long iteration, const std::string& stage, const LossRecord& rec, long gpinn_iteration, bool test);
  void check_divergence(const LossRecord& rec, long iteration) const;

  Model& model_;
  const PdeBenchmark& bench_;
  TrainingSchedule schedule_;
  TestError test_error_;
  SnapshotHook hook_;
  LossEvaluator evaluator_;
  StrategyState state_;
  Rng rng_;
  std::vector<LogRow> log_;
};

}  // namespace gcpinn
