#include <cmath>

#include "doctest.h"
#include "gcpinn/optim.hpp"

using namespace gcpinn;

TEST_CASE("L-BFGS minimizes a 1D quadratic in a few iterations") {
  std::vector<double> x = {0.0};
  auto f = [](std::span<const double> p, std::span<double> g) {
    g[0] = 2.0 * (p[0] - 3.0);
    return (p[0] - 3.0) * (p[0] - 3.0);
  };
  LbfgsConfig cfg;
  cfg.max_iter = 5;
  const LbfgsResult r = lbfgs_minimize(f, x, cfg);
  CHECK(std::abs(x[0] - 3.0) <= 1e-10);
  CHECK(r.iterations <= 5);
}

TEST_CASE("L-BFGS solves Rosenbrock") {
  std::vector<double> x = {-1.2, 1.0};
  auto f = [](std::span<const double> p, std::span<double> g) {
    const double a = 1.0 - p[0], b = p[1] - p[0] * p[0];
    g[0] = -2.0 * a - 400.0 * p[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  LbfgsConfig cfg;
  cfg.max_iter = 100;
  const LbfgsResult r = lbfgs_minimize(f, x, cfg);
  CHECK(r.loss < 1e-8);
  CHECK(r.iterations <= 100);
}

TEST_CASE("L-BFGS leaves masked coordinates alone") {
  std::vector<double> x = {0.0, 5.0};
  auto f = [](std::span<const double> p, std::span<double> g) {
    g[0] = 2.0 * (p[0] - 1.0);
    g[1] = 2.0 * p[1];
    return (p[0] - 1.0) * (p[0] - 1.0) + p[1] * p[1];
  };
  const std::vector<char> mask = {1, 0};
  lbfgs_minimize(f, x, LbfgsConfig{}, mask);
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == 5.0);
}

TEST_CASE("Adam first step moves each coordinate by lr against the gradient sign") {
  Adam adam(3, AdamConfig{0.01});
  std::vector<double> p = {1.0, 2.0, 3.0};
  const std::vector<double> g = {4.0, -0.5, 100.0};
  const std::vector<char> mask = {1, 1, 0};
  adam.step(p, g, mask);
  CHECK(p[0] == doctest::Approx(0.99).epsilon(1e-9));
  CHECK(p[1] == doctest::Approx(2.01).epsilon(1e-9));
  CHECK(p[2] == 3.0);
  CHECK(adam.steps() == 1);
}

TEST_CASE("Adam converges on a quadratic") {
  Adam adam(1, AdamConfig{0.05});
  std::vector<double> p = {4.0};
  for (int i = 0; i < 2000; ++i) {
    const std::vector<double> g = {2.0 * (p[0] + 1.0)};
    adam.step(p, g);
  }
  CHECK(std::abs(p[0] + 1.0) < 1e-3);
}
