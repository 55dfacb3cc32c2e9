#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gcpinn/benchmark.hpp"
#include "gcpinn/checks.hpp"
#include "gcpinn/errors.hpp"
#include "gcpinn/model.hpp"

using namespace gcpinn;
using doctest::Approx;
constexpr double kPi = std::numbers::pi;

namespace {

Eigen::VectorXd pt(double x) {
  Eigen::VectorXd v(1);
  v << x;
  return v;
}
Eigen::VectorXd pt(double x, double y) {
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

Model zero_model(const PdeBenchmark& b) {
  Model m(GeometricMapping::identity(b.dim()), DenseNetwork({b.dim(), 4, b.num_outputs()}));
  m.set_parameters(std::vector<double>(m.parameter_count(), 0.0));
  return m;
}

}  // namespace

TEST_CASE("benchmark catalogue") {
  CHECK(PdeBenchmark::names().size() == 5);
  CHECK_THROWS_AS(PdeBenchmark::make("heat3d"), ConfigError);
  for (const auto& n : PdeBenchmark::names()) {
    const auto b = PdeBenchmark::make(n);
    CHECK(b.operator_order() == 2);
    CHECK(b.num_residuals() == (n == "ns2d" ? 3 : 1));
    for (const auto& op : b.operators()) CHECK(op.max_channel_order(ChannelSet(b.dim(), 3)) <= 2);
  }
}

TEST_CASE("manufactured solution values") {
  const auto h = PdeBenchmark::make("helmholtz1d");
  CHECK(h.manufactured_solution(pt(0.05))[0] == Approx(1.0).epsilon(1e-15));
  const auto ns = PdeBenchmark::make("ns2d");
  CHECK(ns.manufactured_solution(pt(0.25, 0.25))[2] == Approx(0.5).epsilon(1e-15));
  for (double x : {0.0, 0.3, 0.99}) CHECK(std::abs(ns.manufactured_solution(pt(x, 0.0))[1]) <= 1e-15);
}

TEST_CASE("source terms") {
  const auto h = PdeBenchmark::make("helmholtz1d");
  CHECK(h.source_term(pt(0.05))[0] == Approx(100.0 - 100.0 * kPi * kPi).epsilon(1e-13));
  CHECK(h.source_term(pt(0.05))[0] == Approx(-886.96).epsilon(1e-5));

  const auto b = PdeBenchmark::make("burgers1d");
  for (double x : {0.1, 0.37, 0.8}) {
    const double u = std::sin(2 * kPi * x) + 0.1 * std::sin(16 * kPi * x);
    const double ux = 2 * kPi * std::cos(2 * kPi * x) + 1.6 * kPi * std::cos(16 * kPi * x);
    const double uxx = -4 * kPi * kPi * std::sin(2 * kPi * x) - 25.6 * kPi * kPi * std::sin(16 * kPi * x);
    CHECK(b.source_term(pt(x))[0] == Approx(-0.1 * uxx + u * ux).epsilon(1e-12));
  }

  const auto ns = PdeBenchmark::make("ns2d");
  Rng rng(4);
  const Eigen::MatrixXd p = ns.sample_interior(50, rng);
  for (int i = 0; i < 50; ++i) CHECK(std::abs(ns.source_term(p.col(i))[2]) <= 1e-9);
}

TEST_CASE("source gradient matches finite differences") {
  for (const auto& n : PdeBenchmark::names()) {
    const auto b = PdeBenchmark::make(n);
    Rng rng(6);
    const Eigen::MatrixXd p = b.sample_interior(5, rng);
    for (int i = 0; i < 5; ++i) {
      const Eigen::MatrixXd G = b.source_gradient(p.col(i));
      for (int r = 0; r < b.num_residuals(); ++r) {
        const Jet fd = finite_difference_oracle([&](const Eigen::VectorXd& x) { return b.source_term(x)[r]; },
                                                p.col(i), 1e-6);
        for (int k = 0; k < b.dim(); ++k) {
          CHECK(std::abs(G(r, k) - fd.grad[k]) <= 1e-6 * std::max(1.0, std::abs(G(r, k))));
        }
      }
    }
  }
}

TEST_CASE("residuals of simple models") {
  const auto h = PdeBenchmark::make("helmholtz1d");
  const Model z = zero_model(h);
  for (double x : {0.05, 0.4}) CHECK(h.residual(z, pt(x))[0] == Approx(-h.source_term(pt(x))[0]).epsilon(1e-15));
  CHECK(h.boundary_residual(z, pt(0.0))[0] == 0.0);

  // u(x) = x on conv-diff 1D: only convection survives
  const auto cd = PdeBenchmark::make("convdiff1d");
  Model lin(GeometricMapping::identity(1), DenseNetwork({1, 1}));
  lin.set_parameters(std::vector<double>{1.0, 0.0});
  for (double x : {0.2, 0.7}) CHECK(cd.residual(lin, pt(x))[0] == Approx(1.0 - cd.source_term(pt(x))[0]).epsilon(1e-12));

  const auto c2 = PdeBenchmark::make("convdiff2d");
  CHECK(c2.boundary_residual(zero_model(c2), pt(1.0, 0.3))[0] == Approx(-0.8).epsilon(1e-12));
}

TEST_CASE("exact channels close every operator") {
  for (const auto& r : mms_checks(1000)) {
    INFO(r.name << " measured " << r.measured);
    CHECK(r.passed);
  }
}

TEST_CASE("operator derivative matches differentiated residual") {
  const auto ns = PdeBenchmark::make("ns2d");
  const ChannelSet cs(2, 3);
  const Eigen::VectorXd x = pt(0.4, 0.6);
  const Eigen::MatrixXd U = ns.exact_channels(x);
  for (int r = 0; r < 3; ++r) {
    for (int axis = 0; axis < 2; ++axis) {
      const ResidualOperator d = ns.operators()[r].derivative(axis, cs);
      const double value = d.apply([&](int o, int c) { return U(o, c); });
      const Jet fd = finite_difference_oracle(
          [&](const Eigen::VectorXd& p) {
            const Eigen::MatrixXd V = ns.exact_channels(p);
            return ns.operators()[r].apply([&](int o, int c) { return V(o, c); });
          },
          x, 1e-6);
      CHECK(std::abs(value - fd.grad[axis]) <= 1e-5 * std::max(1.0, std::abs(value)));
    }
  }
}

TEST_CASE("collocation sampling") {
  const DomainBox unit = DomainBox::unit(1);
  Rng a(12), b(12);
  CHECK(sample_collocation(unit, 1, a)(0, 0) == sample_collocation(unit, 1, b)(0, 0));
  CHECK_THROWS(sample_collocation(unit, 0, a));
  Rng rng(1);
  const Eigen::MatrixXd big = sample_collocation(unit, 100000, rng);
  CHECK(std::abs(big.mean() - 0.5) <= 0.01);
  const Eigen::MatrixXd sq = sample_collocation(DomainBox::unit(2), 1000, rng);
  CHECK(sq.minCoeff() > 0.0);
  CHECK(sq.maxCoeff() < 1.0);
}

TEST_CASE("stratified sampling puts one point in each cell") {
  Rng rng(3);
  const Eigen::MatrixXd s1 = sample_stratified(DomainBox::unit(1), 100, rng);
  for (int i = 0; i < 100; ++i) CHECK(static_cast<int>(std::floor(s1(0, i) * 100)) == i);
  const Eigen::MatrixXd s2 = sample_stratified(DomainBox::unit(2), 30, rng);  // 5x5 grid plus 5 free points
  std::vector<int> hits(25, 0);
  for (int i = 0; i < 25; ++i) hits[static_cast<int>(s2(0, i) * 5) + 5 * static_cast<int>(s2(1, i) * 5)]++;
  for (int h : hits) CHECK(h == 1);
  CHECK(s2.minCoeff() > 0.0);
  CHECK(s2.maxCoeff() < 1.0);
}

TEST_CASE("boundary sets") {
  Rng rng(2);
  const auto h = PdeBenchmark::make("helmholtz1d");
  const auto hb = h.boundary_sets(400, rng);
  REQUIRE(hb.size() == 1);
  CHECK(hb[0].points.cols() == 2);
  const auto ns = PdeBenchmark::make("ns2d");
  const auto nb = ns.boundary_sets(50, rng);
  REQUIRE(nb.size() == 2);
  CHECK(nb[0].outputs == std::vector<int>{0, 1});
  CHECK(nb[0].points.cols() == 50);
  for (int i = 0; i < 50; ++i) {
    const double x = nb[0].points(0, i), y = nb[0].points(1, i);
    CHECK((x == 0.0 || x == 1.0 || y == 0.0 || y == 1.0));
  }
  CHECK(nb[1].outputs == std::vector<int>{2});
  CHECK(nb[1].targets(0, 0) == Approx(ns.manufactured_solution(ns.anchor_point())[2]));
}

TEST_CASE("amplification probe") {
  CHECK(amplification_probe(0.01, 100001).ratio == Approx(1e4).epsilon(0.05));
  CHECK(amplification_probe(1.0, 1001).ratio == Approx(1.0).epsilon(1e-12));
  CHECK(amplification_probe(0.1, 10001).ratio == Approx(100.0).epsilon(0.05));
  CHECK_THROWS(amplification_probe(0.01, 200));
}
