#include <sstream>

#include "doctest.h"
#include "gcpinn/errors.hpp"
#include "gcpinn/training.hpp"

using namespace gcpinn;
using doctest::Approx;

namespace {

TrainingSchedule small(Strategy s, long epochs) {
  TrainingSchedule t;
  t.strategy = s;
  t.adam_epochs = epochs;
  t.adam_points = 64;
  t.lbfgs_steps = 5;
  t.lbfgs_points = 128;
  t.boundary_points = 32;
  t.test_every = 10;
  return t;
}

Model small_model(const PdeBenchmark& bench, std::uint64_t seed = 7) {
  return Model(GeometricMapping::identity(bench.dim()), init_network(seed, {bench.dim(), 10, 10, bench.num_outputs()}));
}

}  // namespace

TEST_CASE("gPINN coefficient schedule") {
  TrainingSchedule s;
  s.gpinn.lambda = 2e-6;
  CHECK(gpinn_coefficient(s, 0) == 0.0);
  CHECK(gpinn_coefficient(s, 1999) == 0.0);
  CHECK(gpinn_coefficient(s, 2000) == 0.0);
  CHECK(gpinn_coefficient(s, 3000) == Approx(1e-6));
  CHECK(gpinn_coefficient(s, 4000) == Approx(2e-6));
  CHECK(gpinn_coefficient(s, 9000) == Approx(2e-6));
}

TEST_CASE("method names and strategies") {
  for (const auto& name : method_names()) CHECK(std::string(to_string(parse_method(name))) == name);
  CHECK(strategy_of(Method::gc_torus) == Strategy::vanilla);
  CHECK(strategy_of(Method::sa) == Strategy::sa);
  CHECK(strategy_of(Method::rar) == Strategy::rar);
  CHECK(strategy_of(Method::gpinn) == Strategy::gpinn);
  CHECK_THROWS_AS(parse_method("gc-banana"), ConfigError);
  CHECK(parse_sampler("uniform") == Sampler::uniform);
  CHECK(std::string(to_string(Sampler::stratified)) == "stratified");
  CHECK_THROWS_AS(parse_sampler("sobol"), ConfigError);
}

TEST_CASE("SA with unit weights matches the vanilla loss with the same weights") {
  const PdeBenchmark bench = PdeBenchmark::make("burgers1d");
  Model m = small_model(bench);
  Rng rng(2);
  const ResidualBatch batch = make_residual_batch(bench, bench.sample_interior(80, rng), false);
  const auto bnd = bench.boundary_sets(0, rng);

  TrainingSchedule sa = small(Strategy::sa, 0);
  TrainingSchedule van = small(Strategy::vanilla, 0);
  van.bc_weight = 1.0;
  Trainer ts(m, bench, sa), tv(m, bench, van);
  ts.set_sa_log_weights(0.0, 0.0);
  std::vector<double> gs(m.parameter_count() + 2), gv(m.parameter_count());
  LossRecord rec;
  const double Ls = ts.total_loss(batch, bnd, 0, false, &rec, gs);
  const double Lv = tv.total_loss(batch, bnd, 0, false, nullptr, gv);
  CHECK(Ls == Lv);
  for (std::size_t i = 0; i < gv.size(); ++i) CHECK(gs[i] == gv[i]);
  // weight gradients are the raw components at exp(0) = 1
  CHECK(gs[gv.size()] == Approx(rec.residual));
  CHECK(gs[gv.size() + 1] == Approx(rec.boundary));
}

TEST_CASE("SA weights are clipped") {
  const PdeBenchmark bench = PdeBenchmark::make("helmholtz1d");
  Model m = small_model(bench);
  Trainer t(m, bench, small(Strategy::sa, 0));
  t.set_sa_log_weights(20.0, -20.0);
  const auto [wr, wb] = t.loss_weights();
  CHECK(wr == 1e3);
  CHECK(wb == 1e-3);
}

TEST_CASE("gPINN term is off in L-BFGS") {
  const PdeBenchmark bench = PdeBenchmark::make("helmholtz1d");
  Model m = small_model(bench);
  Rng rng(3);
  const ResidualBatch batch = make_residual_batch(bench, bench.sample_interior(40, rng), true);
  const auto bnd = bench.boundary_sets(0, rng);
  Trainer t(m, bench, small(Strategy::gpinn, 0));
  LossRecord a, b;
  t.total_loss(batch, bnd, 5000, false, &a, {});
  t.total_loss(batch, bnd, 5000, true, &b, {});
  CHECK(a.gpinn > 0.0);
  CHECK(b.gpinn == 0.0);
}

TEST_CASE("zero epochs leave the model unchanged") {
  const PdeBenchmark bench = PdeBenchmark::make("convdiff1d");
  Model m = small_model(bench);
  const auto before = m.parameters();
  TrainingSchedule s = small(Strategy::vanilla, 0);
  s.lbfgs_steps = 0;
  Trainer t(m, bench, s);
  t.run_adam_stage();
  const LbfgsResult r = t.run_lbfgs_stage();
  CHECK(m.parameters() == before);
  CHECK(r.iterations == 0);
  REQUIRE(t.log().size() == 1);
  CHECK(t.log()[0].stage == "lbfgs");
}

TEST_CASE("RAR grows the pool at every refinement") {
  const PdeBenchmark bench = PdeBenchmark::make("helmholtz1d");
  Model m = small_model(bench);
  TrainingSchedule s = small(Strategy::rar, 12);
  s.rar.every = 5;
  s.rar.candidates = 200;
  s.rar.add = 20;
  s.rar.capacity = 100;
  s.lbfgs_steps = 0;
  Trainer t(m, bench, s);
  t.run_adam_stage();
  CHECK(t.log()[4].pool_size == 64);
  CHECK(t.log()[5].pool_size == 84);
  CHECK(t.log()[10].pool_size == 100);  // capped
  t.run_lbfgs_stage();
  CHECK(t.state().pool.size() == 100);
  CHECK(t.state().pool_frozen);
}

TEST_CASE("SA weights train during Adam and stay fixed in L-BFGS") {
  const PdeBenchmark bench = PdeBenchmark::make("burgers1d");
  Model m = small_model(bench);
  Trainer t(m, bench, small(Strategy::sa, 5));
  t.run_adam_stage();
  const auto w = t.loss_weights();
  CHECK(w.first > 1.0);  // ascent on the residual weight
  t.run_lbfgs_stage();
  CHECK(t.loss_weights() == w);
  for (const auto& row : t.log()) {
    if (row.stage == "lbfgs") CHECK(row.w_res == w.first);
  }
}

TEST_CASE("training logs are identical across worker counts") {
  const PdeBenchmark bench = PdeBenchmark::make("ns2d");
  auto run = [&](int workers) {
    Model m = small_model(bench);
    TrainingSchedule s = small(Strategy::gpinn, 4);
    s.gpinn.warmup = 1;
    s.gpinn.ramp = 2;
    s.gpinn.lambda = 0.3;
    s.workers = workers;
    Trainer t(m, bench, s);
    t.run_adam_stage();
    t.run_lbfgs_stage();
    std::ostringstream os;
    write_convergence_csv(os, t.log());
    return os.str();
  };
  CHECK(run(1) == run(3));
}

TEST_CASE("divergence is reported") {
  const PdeBenchmark bench = PdeBenchmark::make("helmholtz1d");
  Model m = small_model(bench);
  TrainingSchedule s = small(Strategy::vanilla, 3);
  s.divergence_threshold = 1e-30;
  Trainer t(m, bench, s);
  CHECK_THROWS_AS(t.run_adam_stage(), DivergenceError);
}

TEST_CASE("reported counts include strategy parameters") {
  const PdeBenchmark bench = PdeBenchmark::make("helmholtz1d");
  const Model sa = build_model(Method::sa, bench, {}, 1);
  CHECK(reported_parameter_count(Method::sa, sa) == sa.parameter_count() + 2);
}
