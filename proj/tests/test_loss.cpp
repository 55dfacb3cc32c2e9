#include <cmath>

#include "doctest.h"
#include "gcpinn/errors.hpp"
#include "gcpinn/loss.hpp"

using namespace gcpinn;
using doctest::Approx;

namespace {

struct Fixture {
  PdeBenchmark bench;
  Model model;
  ResidualBatch batch;
  std::vector<BoundarySet> boundary;

  Fixture(const std::string& name, int n, std::uint64_t seed = 1)
      : bench(PdeBenchmark::make(name)),
        model(GeometricMapping::identity(bench.dim()), init_network(seed, {bench.dim(), 12, 12, bench.num_outputs()})) {
    Rng rng(seed);
    batch = make_residual_batch(bench, bench.sample_interior(n, rng), true);
    boundary = bench.boundary_sets(40, rng);
  }
};

}  // namespace

TEST_CASE("a model that solves its own manufactured problem has zero loss") {
  Fixture f("ns2d", 300);
  // replace sources and boundary data with the model's own operator values
  const ChannelSet cs(2, 2);
  const Eigen::MatrixXd out = f.model.forward(f.batch.points, cs);
  for (int i = 0; i < f.batch.size(); ++i) {
    for (int r = 0; r < 3; ++r) {
      f.batch.source(r, i) = f.bench.operators()[r].apply(
          [&](int o, int c) { return out(o, static_cast<Eigen::Index>(c) * f.batch.size() + i); });
    }
  }
  for (auto& b : f.boundary) {
    const Eigen::MatrixXd v = f.model.predict(b.points);
    for (std::size_t k = 0; k < b.outputs.size(); ++k) b.targets.row(k) = v.row(b.outputs[k]);
  }
  LossRecord rec;
  const double L = LossEvaluator(f.bench).evaluate(f.model, f.batch, f.boundary, LossWeights{}, &rec, {});
  CHECK(L <= 1e-15);
  CHECK(rec.residual <= 1e-15);
  CHECK(rec.boundary == 0.0);
}

TEST_CASE("loss components add up") {
  Fixture f("burgers1d", 100);
  f.model.mapping() = GeometricMapping::radial(20.0, {0.0});
  f.model.mapping().set_trainable(true);
  auto p = f.model.parameters();
  p.back() = 20.5;
  f.model.set_parameters(p);
  LossWeights w;
  w.residual = 0.7;
  w.boundary = 3.0;
  w.regularization = 0.1;
  w.gpinn = 1e-3;
  LossRecord rec;
  const double L = LossEvaluator(f.bench).evaluate(f.model, f.batch, f.boundary, w, &rec, {});
  CHECK(rec.regularization == Approx(0.25));
  CHECK(rec.gpinn == Approx(1e-3 * std::min(rec.gpinn_ratio, kGpinnClip)));
  CHECK(L == Approx(0.7 * rec.residual + 3.0 * rec.boundary + 0.1 * 0.25 + rec.gpinn).epsilon(1e-14));
  CHECK(rec.total == L);
}

TEST_CASE("mean squared residual matches per-point residuals") {
  Fixture f("convdiff2d", 50);
  const Eigen::VectorXd sq = LossEvaluator(f.bench).squared_residuals(f.model, f.batch);
  double mean = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double r = f.bench.residual(f.model, f.batch.points.col(i))[0];
    CHECK(sq[i] == Approx(r * r).epsilon(1e-12));
    mean += r * r / 50;
  }
  LossRecord rec;
  LossEvaluator(f.bench).evaluate(f.model, f.batch, f.boundary, LossWeights{}, &rec, {});
  CHECK(rec.residual == Approx(mean).epsilon(1e-12));
}

TEST_CASE("gPINN ratio equals residual-gradient energy over field-gradient energy") {
  Fixture f("helmholtz1d", 40);
  const int n = f.batch.size();
  double G = 0.0, E = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = f.batch.points.col(i);
    const Jet fd = finite_difference_oracle([&](const Eigen::VectorXd& p) { return f.bench.residual(f.model, p)[0]; },
                                            x, 1e-5);
    G += fd.grad.squaredNorm() / n;
    E += evaluate_jet(f.model, x)[0].grad.squaredNorm() / n;
  }
  LossWeights w;
  w.gpinn = 1e-9;
  LossRecord rec;
  LossEvaluator(f.bench).evaluate(f.model, f.batch, f.boundary, w, &rec, {});
  CHECK(rec.gpinn_ratio == Approx(G / (E + kGpinnDenominatorGuard)).epsilon(1e-5));
}

TEST_CASE("clipped gPINN term contributes no gradient") {
  Fixture f("helmholtz1d", 40);
  LossWeights off, on;
  on.gpinn = 2.0;
  std::vector<double> g0(f.model.parameter_count()), g1(f.model.parameter_count());
  LossRecord rec;
  const LossEvaluator ev(f.bench);
  const double L0 = ev.evaluate(f.model, f.batch, f.boundary, off, nullptr, g0);
  const double L1 = ev.evaluate(f.model, f.batch, f.boundary, on, &rec, g1);
  REQUIRE(rec.gpinn_ratio > kGpinnClip);
  CHECK(L1 == Approx(L0 + 2.0 * kGpinnClip).epsilon(1e-14));
  for (std::size_t p = 0; p < g0.size(); ++p) CHECK(g1[p] == Approx(g0[p]).epsilon(1e-12));
}

TEST_CASE("residual Jacobian rows match finite differences") {
  Fixture f("ns2d", 4, 3);
  const LossEvaluator ev(f.bench);
  const Eigen::MatrixXd J = ev.residual_jacobian(f.model, f.batch);
  CHECK(J.rows() == 12);
  CHECK(J.cols() == static_cast<Eigen::Index>(f.model.parameter_count()));
  auto p = f.model.parameters();
  for (std::size_t k : {std::size_t{0}, std::size_t{50}, p.size() - 1}) {
    auto q = p;
    q[k] += 1e-6;
    f.model.set_parameters(q);
    Eigen::MatrixXd plus(3, 4), minus(3, 4);
    for (int i = 0; i < 4; ++i) plus.col(i) = f.bench.residual(f.model, f.batch.points.col(i));
    q[k] -= 2e-6;
    f.model.set_parameters(q);
    for (int i = 0; i < 4; ++i) minus.col(i) = f.bench.residual(f.model, f.batch.points.col(i));
    f.model.set_parameters(p);
    for (int i = 0; i < 4; ++i) {
      for (int r = 0; r < 3; ++r) {
        const double fd = (plus(r, i) - minus(r, i)) / 2e-6;
        CHECK(std::abs(J(i * 3 + r, k) - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST_CASE("batch selection and concatenation") {
  Fixture f("convdiff1d", 10);
  const int idx[] = {3, 3, 9};
  const ResidualBatch s = select_columns(f.batch, idx);
  CHECK(s.size() == 3);
  CHECK(s.points(0, 1) == f.batch.points(0, 3));
  CHECK(s.source_grad(0, 2) == f.batch.source_grad(0, 9));
  const ResidualBatch c = concat(f.batch, s);
  CHECK(c.size() == 13);
  CHECK(c.source(0, 12) == f.batch.source(0, 9));
}

TEST_CASE("non-finite losses are reported with their components") {
  Fixture f("helmholtz1d", 10);
  f.batch.source(0, 4) = std::numeric_limits<double>::infinity();
  try {
    LossEvaluator(f.bench).evaluate(f.model, f.batch, f.boundary, LossWeights{}, nullptr, {});
    FAIL("expected an evaluation error");
  } catch (const EvaluationError& e) {
    CHECK(std::string(e.what()).find("residual=") != std::string::npos);
  }
}
