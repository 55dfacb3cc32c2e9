#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "gcpinn/benchmark.hpp"
#include "gcpinn/model.hpp"

namespace gcpinn {

/// Collocation points with their source terms.
struct ResidualBatch {
  Eigen::MatrixXd points;       // d x n
  Eigen::MatrixXd source;       // residual components x n
  Eigen::MatrixXd source_grad;  // (component * d + axis) x n; empty unless built with gradients

  int size() const { return static_cast<int>(points.cols()); }
  bool has_gradient() const { return source_grad.size() > 0; }
};

ResidualBatch make_residual_batch(const PdeBenchmark& bench, Eigen::MatrixXd points, bool with_gradient);
/// Columns idx of batch, in the given order (duplicates allowed).
ResidualBatch select_columns(const ResidualBatch& batch, std::span<const int> idx);
/// Concatenates two batches of the same kind.
ResidualBatch concat(const ResidualBatch& a, const ResidualBatch& b);

struct LossWeights {
  double residual = 1.0;
  double boundary = 100.0;
  double regularization = 1e-6;
  double gpinn = 0.0;  // current gradient-enhancement coefficient; 0 disables the term
};

/// Loss components. residual, boundary and regularization are unweighted;
/// gpinn is the weighted, clipped term as added to the total.
struct LossRecord {
  double total = 0.0;
  double residual = 0.0;
  double boundary = 0.0;
  double regularization = 0.0;
  double gpinn = 0.0;
  double gpinn_ratio = 0.0;  // unclipped mean|grad R|^2 / (mean|grad u|^2 + 1e-8)
};

constexpr double kGpinnDenominatorGuard = 1e-8;
constexpr double kGpinnClip = 100.0;

/// Composite PINN loss
///   w_r mean sum_r R_r^2 + w_b sum_sets mean sum_o B_o^2 + w_reg penalty + gPINN term
/// evaluated in fixed chunks of points; chunk results are reduced in
/// ascending order so the value and gradient do not depend on `workers`.
class LossEvaluator {
 public:
  explicit LossEvaluator(const PdeBenchmark& bench, int workers = 1, int chunk = 512);

  int workers() const { return workers_; }

  /// Returns the total loss; when grad is nonempty it receives dL/dtheta
  /// (model parameter ordering, overwritten).
  double evaluate(const Model& model, const ResidualBatch& batch, const std::vector<BoundarySet>& boundary,
                  const LossWeights& weights, LossRecord* record, std::span<double> grad) const;

  /// Sum over components of R_r^2 at every point.
  Eigen::VectorXd squared_residuals(const Model& model, const ResidualBatch& batch) const;

  /// Row (i * components + r) holds dR_r(x_i)/dtheta.
  Eigen::MatrixXd residual_jacobian(const Model& model, const ResidualBatch& batch) const;

 private:
  const PdeBenchmark& bench_;
  int workers_;
  int chunk_;
};

}  // namespace gcpinn
