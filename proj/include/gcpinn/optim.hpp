#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gcpinn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Entries whose mask is 0 are left untouched.
class Adam {
 public:
  Adam(std::size_t n, AdamConfig config = {});

  void step(std::span<double> params, std::span<const double> grad, std::span<const char> mask = {});
  long steps() const { return t_; }

 private:
  AdamConfig config_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

/// f(x, grad) returns the objective and writes its gradient.
using Objective = std::function<double(std::span<const double>, std::span<double>)>;

struct LbfgsConfig {
  double lr = 1.0;
  int max_iter = 500;
  int history = 50;
  double tolerance_grad = 1e-10;
  double tolerance_change = 1e-15;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search = 25;
};

struct LbfgsResult {
  int iterations = 0;
  int evaluations = 0;
  double loss = 0.0;
  std::string stop_reason;
};

/// L-BFGS with a strong-Wolfe line search (cubic interpolation and zoom).
/// Masked-out coordinates receive zero gradient and never move.
/// on_iteration(iteration, loss) runs after every accepted step.
LbfgsResult lbfgs_minimize(const Objective& f, std::vector<double>& x, const LbfgsConfig& config,
                           std::span<const char> mask = {},
                           const std::function<void(int, double)>& on_iteration = {});

}  // namespace gcpinn
