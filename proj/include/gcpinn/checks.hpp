#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gcpinn/benchmark.hpp"
#include "json.hpp"

namespace gcpinn {

/// One verified property: measured value against its tolerance.
struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

nlohmann::json checks_to_json(const std::vector<CheckResult>& results);

const std::vector<std::string>& check_suites();

/// Suites: derivative, mapping, mms, amplification, or all.
std::vector<CheckResult> run_checks(const std::string& suite);

std::vector<CheckResult> derivative_checks(int points_per_case = 100);
/// Parameter gradients of every method's full loss against finite differences.
std::vector<CheckResult> parameter_gradient_checks();
std::vector<CheckResult> mapping_checks();
std::vector<CheckResult> mms_checks(int points = 1000);
std::vector<CheckResult> amplification_checks();

/// Source term written out by hand (independent of the Taylor machinery).
Eigen::VectorXd reference_source(const PdeBenchmark& bench, const Eigen::VectorXd& x);

}  // namespace gcpinn
