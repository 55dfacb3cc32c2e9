#include <cmath>

#include "doctest.h"
#include "gcpinn/errors.hpp"
#include "gcpinn/evaluation.hpp"
#include "gcpinn/training.hpp"

using namespace gcpinn;
using doctest::Approx;

namespace {

FieldSamples samples(int n) {
  FieldSamples s;
  s.exact.resize(n);
  s.exact_grad.resize(1, n);
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) / n;
    s.exact[i] = std::sin(2 * M_PI * x);
    s.exact_grad(0, i) = 2 * M_PI * std::cos(2 * M_PI * x);
  }
  s.value = s.exact;
  s.grad = s.exact_grad;
  return s;
}

}  // namespace

TEST_CASE("field metrics on simple perturbations") {
  FieldSamples s = samples(1000);
  MetricSet m = field_metrics(s);
  CHECK(m.mse == 0.0);
  CHECK(m.rel_l2 == 0.0);
  CHECK(m.rel_h1 == 0.0);

  s.value = 2.0 * s.exact;
  s.grad = 2.0 * s.exact_grad;
  m = field_metrics(s);
  CHECK(m.rel_l2 == Approx(1.0));
  CHECK(m.rel_h1 == Approx(1.0));

  s.value = s.exact.array() + 0.1;
  s.grad = s.exact_grad;
  m = field_metrics(s);
  CHECK(m.mse == Approx(0.01));
  CHECK(m.rel_l2 == Approx(0.1 / std::sqrt(0.5)).epsilon(1e-6));
}

TEST_CASE("zero reference field is an evaluation error") {
  FieldSamples s = samples(10);
  s.exact.setZero();
  s.exact_grad.setZero();
  CHECK_THROWS_AS(field_metrics(s), EvaluationError);
}

TEST_CASE("effective rank examples") {
  const double a[] = {1.0, 0.0, 0.0};
  const double b[] = {1.0, 1.0, 1.0, 1.0};
  const double c[] = {2.0, 1.0, 1.0};
  const double c_scaled[] = {2e6, 1e6, 1e6};
  const double neg[] = {1.0, 1.0, -1e-18};
  const double zero[] = {0.0, 0.0};
  CHECK(effective_rank(a) == Approx(1.0).epsilon(1e-14));
  CHECK(effective_rank(b) == Approx(4.0).epsilon(1e-14));
  CHECK(effective_rank(c) == Approx(2.82842712474619).epsilon(1e-12));
  CHECK(effective_rank(c_scaled) == Approx(effective_rank(c)).epsilon(1e-12));
  CHECK(effective_rank(neg) == Approx(2.0).epsilon(1e-12));
  CHECK_THROWS(effective_rank(zero));
}

TEST_CASE("NTK kernel structure") {
  const PdeBenchmark bench = PdeBenchmark::make("convdiff1d");
  const Model model = build_model(Method::gc_local, bench, {}, 5);

  Eigen::MatrixXd one(1, 1);
  one << 0.3;
  NtkReport r = ntk_matrix(model, bench, one);
  CHECK(r.kernel.rows() == 1);
  CHECK(r.effective_rank == Approx(1.0));

  Eigen::MatrixXd pts(1, 6);
  pts << 0.1, 0.2, 0.2, 0.5, 0.7, 0.9;
  r = ntk_matrix(model, bench, pts);
  CHECK((r.kernel - r.kernel.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r.kernel.row(1) - r.kernel.row(2)).cwiseAbs().maxCoeff() <= 1e-12 * r.kernel.cwiseAbs().maxCoeff());
  CHECK(r.eigenvalues.minCoeff() >= -1e-10 * r.eigenvalues.maxCoeff());
  for (int i = 1; i < r.eigenvalues.size(); ++i) CHECK(r.eigenvalues[i] <= r.eigenvalues[i - 1]);
  CHECK(r.effective_rank <= 5.0 + 1e-9);
}

TEST_CASE("kernel from rows") {
  Eigen::MatrixXd G(2, 3);
  G << 1, 0, 0, 0, 2, 0;
  const NtkReport r = ntk_from_rows(G);
  CHECK(r.kernel(0, 0) == 1.0);
  CHECK(r.kernel(1, 1) == 4.0);
  CHECK(r.kernel(0, 1) == 0.0);
  CHECK(r.eigenvalues[0] == Approx(4.0));
}

TEST_CASE("test sets and reports") {
  const PdeBenchmark bench = PdeBenchmark::make("ns2d");
  const TestSet a = make_test_set(bench, 50, 3407);
  const TestSet b = make_test_set(bench, 50, 3407);
  CHECK(a.points == b.points);
  CHECK(a.exact.size() == 3);
  CHECK(default_test_seeds() == std::vector<std::uint64_t>{3407, 3408, 3409});

  const Model model = build_model(Method::pinn, bench, {}, 1);
  const auto seeds = default_test_seeds();
  const EvaluationReport rep = compute_metrics(model, bench, 50, seeds);
  CHECK(rep.trials.size() == 3);
  CHECK(rep.component_names.size() == 3);
  double mean = 0.0;
  for (const auto& t : rep.trials) mean += t.headline.rel_l2 / 3;
  CHECK(rep.mean.rel_l2 == Approx(mean));
  const auto j = report_to_json(rep);
  CHECK(j.contains("trials"));
}
