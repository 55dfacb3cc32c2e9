#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gcpinn/benchmark.hpp"
#include "gcpinn/model.hpp"
#include "json.hpp"

namespace gcpinn {

struct MetricSet {
  double mse = 0.0;
  double rel_l2 = 0.0;
  double rel_h1 = 0.0;
};

/// Predicted and exact values and gradients of one scalar field on a point set.
struct FieldSamples {
  Eigen::VectorXd value, exact;            // n
  Eigen::MatrixXd grad, exact_grad;        // d x n
};

/// MSE, relative L2 and relative H1 (all spatial partials) of a field.
MetricSet field_metrics(const FieldSamples& s);

/// Test points with exact fields, reusable across evaluations.
struct TestSet {
  std::uint64_t seed = 0;
  Eigen::MatrixXd points;                  // d x n
  std::vector<Eigen::VectorXd> exact;      // per output, n
  std::vector<Eigen::MatrixXd> exact_grad; // per output, d x n
};

TestSet make_test_set(const PdeBenchmark& bench, int n_test, std::uint64_t seed);

struct TrialMetrics {
  std::uint64_t seed = 0;
  MetricSet headline;
  std::vector<MetricSet> components;  // one per network output
};

/// Headline field: the single output, or the velocity magnitude for ns2d.
TrialMetrics evaluate_on(const Model& model, const PdeBenchmark& bench, const TestSet& test);

struct EvaluationReport {
  int n_test = 0;
  std::string field;
  std::vector<std::string> component_names;
  std::vector<TrialMetrics> trials;
  MetricSet mean;
  std::vector<MetricSet> component_mean;
};

std::vector<std::uint64_t> default_test_seeds(std::uint64_t seed = 3407);

EvaluationReport compute_metrics(const Model& model, const PdeBenchmark& bench, int n_test,
                                 std::span<const std::uint64_t> seeds);

nlohmann::json report_to_json(const EvaluationReport& report);

struct NtkReport {
  Eigen::MatrixXd kernel;
  Eigen::VectorXd eigenvalues;  // descending
  double effective_rank = 0.0;
};

/// exp of the Shannon entropy of the normalized spectrum. Tiny negative
/// eigenvalues from round-off count as zero.
double effective_rank(std::span<const double> eigenvalues);

/// Kernel G G^T of the rows of G, its spectrum and effective rank.
NtkReport ntk_from_rows(const Eigen::MatrixXd& G);

/// Residual NTK over the model's trainable parameters at the given points
/// (one row per point and residual component).
NtkReport ntk_matrix(const Model& model, const PdeBenchmark& bench, const Eigen::MatrixXd& points, int workers = 1);

}  // namespace gcpinn
