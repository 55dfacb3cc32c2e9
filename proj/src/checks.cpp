#include "gcpinn/checks.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

#include "gcpinn/errors.hpp"
#include "gcpinn/model.hpp"
#include "gcpinn/training.hpp"

namespace gcpinn {

namespace {

constexpr double kPi = std::numbers::pi;

CheckResult make(const std::string& suite, const std::string& name, double measured, double tolerance,
                 const std::string& detail = {}) {
  return CheckResult{suite, name, measured <= tolerance, measured, tolerance, detail};
}

std::vector<GeometricMapping> mapping_family(const DomainBox& box) {
  const int d = box.dim();
  return {GeometricMapping::identity(d),
          GeometricMapping::torus(box),
          GeometricMapping::radial(20.0, d == 1 ? box.lo : box.center()),
          GeometricMapping::local_stretch(10.0, box.center()),
          GeometricMapping::pwl(box),
          GeometricMapping::saturating(box)};
}

// Points where central differences of the composed field are valid.
bool fd_valid(const GeometricMapping& m, const Eigen::VectorXd& x, double step) {
  const DomainBox& box = m.box();
  if (m.kind() == MappingKind::torus) {
    // the wrap seam sits at normalized coordinate 1/2
    for (int a = 0; a < x.size(); ++a) {
      const double xn = (x[a] - box.lo[a]) / box.extent(a);
      if (std::abs(xn - 0.5) < 4 * step) return false;
    }
  }
  if (m.kind() == MappingKind::pwl) {
    for (int a = 0; a < x.size(); ++a) {
      const double u = m.segments() * (x[a] - box.lo[a]) / box.extent(a);
      if (std::abs(u - std::round(u)) * box.extent(a) / m.segments() < 4 * step) return false;
    }
  }
  if (m.kind() == MappingKind::radial) {
    double r = 0.0;
    for (int a = 0; a < x.size(); ++a) r += (x[a] - m.origin()[a]) * (x[a] - m.origin()[a]);
    if (std::sqrt(r) < 0.05) return false;
  }
  return true;
}

// relative error with a unit floor: fields and their derivatives are O(1) here
double rel(double err, double ref) { return err / std::max(ref, 1.0); }

// Finite-difference steps shrink with the mapping's feature width (1/k for the saturating map).
double step_scale(const GeometricMapping& m) {
  return m.kind() == MappingKind::saturating ? 1.0 / m.parameter_values()[0] : 1.0;
}

}  // namespace

nlohmann::json checks_to_json(const std::vector<CheckResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results) {
    arr.push_back({{"suite", r.suite},
                   {"name", r.name},
                   {"passed", r.passed},
                   {"measured", r.measured},
                   {"tolerance", r.tolerance},
                   {"detail", r.detail}});
  }
  return arr;
}

const std::vector<std::string>& check_suites() {
  static const std::vector<std::string> s = {"derivative", "mapping", "mms", "amplification", "all"};
  return s;
}

std::vector<CheckResult> run_checks(const std::string& suite) {
  std::vector<CheckResult> out;
  auto append = [&](std::vector<CheckResult> v) { out.insert(out.end(), v.begin(), v.end()); };
  bool known = false;
  if (suite == "derivative" || suite == "all") {
    append(derivative_checks());
    append(parameter_gradient_checks());
    known = true;
  }
  if (suite == "mapping" || suite == "all") {
    append(mapping_checks());
    known = true;
  }
  if (suite == "mms" || suite == "all") {
    append(mms_checks());
    known = true;
  }
  if (suite == "amplification" || suite == "all") {
    append(amplification_checks());
    known = true;
  }
  if (!known) throw ConfigError("unknown check suite '" + suite + "'");
  return out;
}

std::vector<CheckResult> derivative_checks(int points_per_case) {
  std::vector<CheckResult> out;
  const double grad_step = 1e-5, hess_step = 1e-4;
  for (const auto& name : PdeBenchmark::names()) {
    const PdeBenchmark bench = PdeBenchmark::make(name);
    const int d = bench.dim(), m = bench.num_outputs();
    for (const auto& mapping : mapping_family(bench.domain())) {
      const Model model(mapping, init_network(3407, backbone_sizes(d, m)));
      Rng rng(2024);
      const double gs = grad_step * step_scale(mapping), hs = hess_step * step_scale(mapping);
      double worst_g = 0.0, worst_h = 0.0, worst_sym = 0.0;
      int tested = 0;
      while (tested < points_per_case) {
        Eigen::VectorXd x(d);
        for (int a = 0; a < d; ++a) x[a] = 0.01 + 0.98 * rng.uniform();
        if (!fd_valid(mapping, x, hs)) continue;
        ++tested;
        const auto jets = evaluate_jet(model, x);
        for (int o = 0; o < m; ++o) {
          const ScalarField f = [&](const Eigen::VectorXd& p) { return model.predict(p)(o, 0); };
          const Jet fg = finite_difference_oracle(f, x, gs);
          const Jet fh = finite_difference_oracle(f, x, hs);
          worst_g = std::max(worst_g, rel((jets[o].grad - fg.grad).norm(), fg.grad.norm()));
          worst_h = std::max(worst_h, rel((jets[o].hess - fh.hess).norm(), fh.hess.norm()));
          worst_sym = std::max(worst_sym, (jets[o].hess - jets[o].hess.transpose()).cwiseAbs().maxCoeff());
        }
      }
      const std::string tag = name + "/" + to_string(mapping.kind());
      out.push_back(make("derivative", "jet_gradient_vs_fd/" + tag, worst_g, 1e-5));
      out.push_back(make("derivative", "jet_hessian_vs_fd/" + tag, worst_h, 1e-3));
      out.push_back(make("derivative", "hessian_symmetry/" + tag, worst_sym, 1e-12));
    }

    // evaluate_jet (chain rule) against the batched x-space channels, identity mapping
    const Model plain(GeometricMapping::identity(d), init_network(3407, backbone_sizes(d, m)));
    Rng rng(7);
    const Eigen::MatrixXd pts = bench.sample_interior(20, rng);
    const ChannelSet cs(d, 2);
    const Eigen::MatrixXd batched = plain.forward(pts, cs, nullptr);
    double drift = 0.0;
    for (int i = 0; i < 20; ++i) {
      const auto a = evaluate_jet(plain, pts.col(i));
      const auto b = batch_jets_at(batched, cs, 20, i);
      for (int o = 0; o < m; ++o) {
        drift = std::max({drift, std::abs(a[o].value - b[o].value), (a[o].grad - b[o].grad).cwiseAbs().maxCoeff(),
                          (a[o].hess - b[o].hess).cwiseAbs().maxCoeff()});
      }
    }
    out.push_back(make("derivative", "identity_neutrality/" + name, drift, 1e-14));
  }
  return out;
}

std::vector<CheckResult> parameter_gradient_checks() {
  std::vector<CheckResult> out;
  struct Case {
    std::string bench;
    std::string method;
  };
  std::vector<Case> cases;
  for (const auto& m : method_names()) cases.push_back({"helmholtz1d", m});
  cases.push_back({"burgers1d", "gpinn"});
  cases.push_back({"convdiff2d", "gc-radial"});
  cases.push_back({"ns2d", "gpinn"});
  cases.push_back({"ns2d", "gc-local"});

  for (const auto& c : cases) {
    const PdeBenchmark bench = PdeBenchmark::make(c.bench);
    const Method method = parse_method(c.method);
    MethodOptions opts;
    opts.train_mapping = true;
    const Model full = build_model(method, bench, opts, 11);
    Model model(full.mapping(), init_network(11, {bench.dim(), 16, 16, bench.num_outputs()}, full.network().frontend()));
    // move trainable mapping parameters off their initial values so the penalty has a gradient
    {
      auto p = model.parameters();
      for (int k = 0; k < model.mapping().parameter_count(); ++k) {
        if (model.mapping().parameters()[k].trainable) p[model.mapping_offset() + k] *= 1.01;
      }
      model.set_parameters(p);
    }
    TrainingSchedule s;
    s.strategy = strategy_of(method);
    s.gpinn.lambda = 1.0;  // large enough for the term to show up in finite differences
    s.reg_coeff = 1e-2;
    Trainer trainer(model, bench, s);
    trainer.set_sa_log_weights(0.3, -0.2);
    Rng rng(5);
    const ResidualBatch batch = make_residual_batch(bench, bench.sample_interior(6, rng), true);
    const auto boundary = bench.boundary_sets(6, rng);
    const long iteration = 5000;

    const std::size_t P = model.parameter_count();
    const bool sa = s.strategy == Strategy::sa;
    std::vector<double> grad(P + (sa ? 2 : 0));
    LossRecord rec;
    trainer.total_loss(batch, boundary, iteration, false, &rec, grad);

    const double h = 1e-6;
    auto params = model.parameters();
    double err = 0.0, scale = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
      auto q = params;
      q[p] = params[p] + h;
      model.set_parameters(q);
      const double lp = trainer.total_loss(batch, boundary, iteration, false, nullptr, {});
      q[p] = params[p] - h;
      model.set_parameters(q);
      const double lm = trainer.total_loss(batch, boundary, iteration, false, nullptr, {});
      const double fd = (lp - lm) / (2 * h);
      const bool trainable = p < model.mapping_offset() || model.mapping().parameters()[p - model.mapping_offset()].trainable;
      if (!trainable) continue;
      err = std::max(err, std::abs(fd - grad[p]));
      scale = std::max(scale, std::abs(fd));
    }
    model.set_parameters(params);
    if (sa) {
      for (int k = 0; k < 2; ++k) {
        const double base_r = 0.3, base_b = -0.2;
        trainer.set_sa_log_weights(base_r + (k == 0 ? h : 0), base_b + (k == 1 ? h : 0));
        const double lp = trainer.total_loss(batch, boundary, iteration, false, nullptr, {});
        trainer.set_sa_log_weights(base_r - (k == 0 ? h : 0), base_b - (k == 1 ? h : 0));
        const double lm = trainer.total_loss(batch, boundary, iteration, false, nullptr, {});
        const double fd = (lp - lm) / (2 * h);
        err = std::max(err, std::abs(fd - grad[P + k]));
        scale = std::max(scale, std::abs(fd));
      }
      trainer.set_sa_log_weights(0.3, -0.2);
    }
    std::ostringstream detail;
    detail << "loss=" << rec.total << " gpinn_term=" << rec.gpinn << " gpinn_ratio=" << rec.gpinn_ratio;
    out.push_back(make("derivative", "loss_parameter_gradient_vs_fd/" + c.bench + "/" + c.method, err / scale, 1e-5,
                       detail.str()));
  }
  return out;
}

std::vector<CheckResult> mapping_checks() {
  std::vector<CheckResult> out;
  const std::string S = "mapping";

  // torus periodicity on dyadic points (x + 1 exact in binary)
  {
    const auto torus = GeometricMapping::torus(DomainBox::unit(1));
    Rng rng(1);
    double worst = 0.0, range_violation = 0.0;
    for (int i = 0; i < 1000; ++i) {
      Eigen::VectorXd x(1), y(1);
      x[0] = std::ldexp(static_cast<double>(rng.below(1ULL << 40)), -40);
      y[0] = x[0] + 1.0;
      const double a = torus.map_point(x)[0], b = torus.map_point(y)[0];
      if (std::memcmp(&a, &b, sizeof a) != 0) worst = std::max(worst, std::max(std::abs(a - b), 1e-300));
      if (!(a > -0.5 && a <= 0.5)) range_violation = std::max(range_violation, std::abs(a));
    }
    out.push_back(make(S, "torus_periodicity_exact", worst, 0.0));
    out.push_back(make(S, "torus_range_half_open", range_violation, 0.0));
    Eigen::VectorXd q(1);
    q[0] = 0.25;
    const double v1 = torus.map_point(q)[0];
    q[0] = 1.0;
    const double v2 = torus.map_point(q)[0];
    out.push_back(make(S, "torus_examples", std::abs(v1 - 0.25) + std::abs(v2), 0.0));
  }
  // torus Jacobian identity, Hessian zero (1D and 2D)
  {
    double worst = 0.0;
    for (int d = 1; d <= 2; ++d) {
      const auto torus = GeometricMapping::torus(DomainBox::unit(d));
      Rng rng(2);
      for (int i = 0; i < 200; ++i) {
        Eigen::VectorXd x(d);
        for (int a = 0; a < d; ++a) x[a] = rng.uniform();
        worst = std::max(worst, (torus.jacobian(x) - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff());
        for (const auto& H : torus.hessian(x)) worst = std::max(worst, H.cwiseAbs().maxCoeff());
      }
    }
    out.push_back(make(S, "torus_jacobian_identity_hessian_zero", worst, 0.0));
  }
  // radial far-field decay: J(R) * R * log(1 + alpha) -> 1
  {
    const double alpha = 20.0;
    const auto radial = GeometricMapping::radial(alpha, {0.0});
    double worst = 0.0;
    for (double R : {10.0, 100.0, 1000.0}) {
      Eigen::VectorXd x(1);
      x[0] = R;
      const double scaled = radial.jacobian(x)(0, 0) * R * std::log1p(alpha);
      worst = std::max(worst, std::max(scaled, 1.0 / scaled));
    }
    out.push_back(make(S, "radial_jacobian_decay_1_over_R", worst, 1.2, "max factor from exact 1/R scaling"));

    Eigen::VectorXd x(1);
    x[0] = 0.5;
    const double v = radial.map_point(x)[0];
    out.push_back(make(S, "radial_value_x0.5", std::abs(v - std::log(11.0) / std::log(21.0)), 1e-15));
    x[0] = 0.0;
    out.push_back(make(S, "radial_jacobian_x0", std::abs(radial.jacobian(x)(0, 0) - 20.0 / std::log(21.0)), 1e-12));
  }
  // local stretch identity limit
  {
    const double beta = 10.0;
    const auto ls = GeometricMapping::local_stretch(beta, {0.0});
    double worst = 0.0;
    const double r0 = 3.0 / std::sqrt(beta);
    for (int i = 0; i <= 1000; ++i) {
      const double r = r0 + (10.0 - r0) * i / 1000.0;
      for (double sgn : {-1.0, 1.0}) {
        Eigen::VectorXd x(1);
        x[0] = sgn * r;
        worst = std::max(worst, std::abs(ls.map_point(x)[0] - x[0]));
      }
    }
    out.push_back(make(S, "local_stretch_identity_beyond_3_over_sqrt_beta", worst, 1e-10));
    Eigen::VectorXd x(1);
    x[0] = 10.0;
    const double far = std::abs(ls.map_point(x)[0] - 10.0);
    x[0] = 0.0;
    out.push_back(make(S, "local_stretch_far_field_and_center", far + std::abs(ls.map_point(x)[0]), 1e-12));
  }
  // saturating gradient collapse
  {
    const auto sat = GeometricMapping::saturating(DomainBox::unit(1));
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      for (double sgn : {-1.0, 1.0}) {
        Eigen::VectorXd x(1);
        x[0] = 0.5 + sgn * (0.35 + 0.65 * i / 1000.0);
        worst = std::max(worst, std::abs(sat.jacobian(x)(0, 0)));
      }
    }
    out.push_back(make(S, "saturating_derivative_beyond_0.35", worst, 1e-5));
    Eigen::VectorXd c(1);
    c[0] = 0.5;
    out.push_back(make(S, "saturating_peak_derivative", std::abs(sat.jacobian(c)(0, 0) - 12.5), 1e-12));
  }
  // pwl monotone with endpoints 0 and 1, under random logits
  {
    auto pwl = GeometricMapping::pwl(DomainBox::unit(1));
    Rng rng(3);
    std::vector<double> logits(16);
    for (auto& l : logits) l = 2.0 * rng.uniform() - 1.0;
    pwl.set_parameter_values(logits);
    Eigen::VectorXd x(1);
    x[0] = 0.0;
    double endpoint = std::abs(pwl.map_point(x)[0]);
    x[0] = 1.0;
    endpoint += std::abs(pwl.map_point(x)[0] - 1.0);
    out.push_back(make(S, "pwl_endpoints", endpoint, 1e-12));
    double prev = -1.0, non_monotone = 0.0;
    for (int i = 0; i <= 4000; ++i) {
      x[0] = i / 4000.0;
      const double v = pwl.map_point(x)[0];
      if (!(v > prev)) non_monotone = std::max(non_monotone, prev - v + 1e-300);
      prev = v;
    }
    out.push_back(make(S, "pwl_strictly_monotone", non_monotone, 0.0));
    double slope_sum = 0.0;
    for (int k = 0; k < 16; ++k) {
      x[0] = (k + 0.5) / 16.0;
      slope_sum += pwl.jacobian(x)(0, 0) / 16.0;
    }
    out.push_back(make(S, "pwl_increments_sum_to_one", std::abs(slope_sum - 1.0), 1e-12));
  }
  // Jacobian and Hessian against finite differences of map_point
  for (int d = 1; d <= 2; ++d) {
    const DomainBox box = DomainBox::unit(d);
    for (const auto& m : mapping_family(box)) {
      Rng rng(4);
      double wj = 0.0, wh = 0.0;
      int tested = 0;
      const double hj = 1e-6, hh = 1e-4;
      while (tested < 100) {
        Eigen::VectorXd x(d);
        for (int a = 0; a < d; ++a) x[a] = 0.01 + 0.98 * rng.uniform();
        if (!fd_valid(m, x, hh)) continue;
        ++tested;
        const Eigen::MatrixXd J = m.jacobian(x);
        const auto H = m.hessian(x);
        for (int k = 0; k < d; ++k) {
          const ScalarField f = [&](const Eigen::VectorXd& p) { return m.map_point(p)[k]; };
          const Jet fj = finite_difference_oracle(f, x, hj);
          const Jet fh = finite_difference_oracle(f, x, hh);
          wj = std::max(wj, (J.row(k).transpose() - fj.grad).norm() / std::max(fj.grad.norm(), 1.0));
          wh = std::max(wh, (H[k] - fh.hess).norm() / std::max(fh.hess.norm(), 1.0));
        }
      }
      const std::string tag = std::to_string(d) + "d/" + to_string(m.kind());
      out.push_back(make(S, "jacobian_vs_fd/" + tag, wj, 1e-6));
      out.push_back(make(S, "hessian_vs_fd/" + tag, wh, 1e-5));
    }
    const auto id = GeometricMapping::identity(d);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(d, 0.37);
    double dev = (id.jacobian(x) - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
    for (const auto& H : id.hessian(x)) dev = std::max(dev, H.cwiseAbs().maxCoeff());
    out.push_back(make(S, "identity_neutral/" + std::to_string(d) + "d", dev, 0.0));
  }
  return out;
}

Eigen::VectorXd reference_source(const PdeBenchmark& bench, const Eigen::VectorXd& X) {
  const auto& c = bench.coefficients();
  Eigen::VectorXd f(bench.num_residuals());
  const double x = X[0];
  switch (bench.kind()) {
    case BenchmarkKind::burgers1d: {
      const double nu = c.at("nu");
      const double u = std::sin(2 * kPi * x) + 0.1 * std::sin(16 * kPi * x);
      const double ux = 2 * kPi * std::cos(2 * kPi * x) + 1.6 * kPi * std::cos(16 * kPi * x);
      const double uxx = -4 * kPi * kPi * std::sin(2 * kPi * x) - 25.6 * kPi * kPi * std::sin(16 * kPi * x);
      f[0] = -nu * uxx + u * ux;
      break;
    }
    case BenchmarkKind::convdiff1d: {
      const double nu = c.at("nu"), a = c.at("a");
      const double e = std::exp(-a * x / nu);
      const double ux = kPi * std::cos(kPi * x) - a / nu * e;
      const double uxx = -kPi * kPi * std::sin(kPi * x) + a * a / (nu * nu) * e;
      f[0] = a * ux - nu * uxx;
      break;
    }
    case BenchmarkKind::helmholtz1d: {
      const double k = c.at("k"), m = c.at("m");
      f[0] = (k * k - 4 * kPi * kPi * m * m) * std::sin(2 * kPi * m * x);
      break;
    }
    case BenchmarkKind::convdiff2d: {
      const double y = X[1], eps = c.at("eps"), A = c.at("A"), l = c.at("eps_layer");
      const double e = std::exp((x - 1) / l);
      const double ux = kPi * std::cos(kPi * x) * std::sin(kPi * y) + A / l * e;
      const double uy = kPi * std::sin(kPi * x) * std::cos(kPi * y);
      const double lap = -2 * kPi * kPi * std::sin(kPi * x) * std::sin(kPi * y) + A / (l * l) * e;
      f[0] = -eps * lap + c.at("bx") * ux + c.at("by") * uy;
      break;
    }
    case BenchmarkKind::ns2d: {
      const double y = X[1], nu = c.at("nu"), rho = c.at("rho"), A = c.at("A"), l = c.at("eps_layer"), B = c.at("B");
      const double E = std::exp((x - 1) / l);
      const double sy = std::sin(kPi * y), cy = std::cos(kPi * y);
      const double u = sy * (1 + A * E), ux = sy * A * E / l, uxx = sy * A * E / (l * l);
      const double uy = kPi * cy * (1 + A * E), uyy = -kPi * kPi * sy * (1 + A * E);
      const double v = A / (l * kPi) * E * (cy - 1), vx = A / (l * l * kPi) * E * (cy - 1);
      const double vxx = A / (l * l * l * kPi) * E * (cy - 1);
      const double vy = -A / l * E * sy, vyy = -A * kPi / l * E * cy;
      const double px = 2 * kPi * B * std::cos(2 * kPi * x) * std::sin(2 * kPi * y);
      const double py = 2 * kPi * B * std::sin(2 * kPi * x) * std::cos(2 * kPi * y);
      f[0] = u * ux + v * uy + px / rho - nu * (uxx + uyy);
      f[1] = u * vx + v * vy + py / rho - nu * (vxx + vyy);
      f[2] = ux + vy;
      break;
    }
  }
  return f;
}

std::vector<CheckResult> mms_checks(int points) {
  std::vector<CheckResult> out;
  for (const auto& name : PdeBenchmark::names()) {
    const PdeBenchmark bench = PdeBenchmark::make(name);
    Rng rng(11);
    const Eigen::MatrixXd pts = bench.sample_interior(points, rng);
    double closure = 0.0, consistency = 0.0, divergence = 0.0;
    for (int i = 0; i < points; ++i) {
      const Eigen::VectorXd x = pts.col(i);
      const Eigen::MatrixXd U = bench.exact_channels(x);
      const Eigen::VectorXd fref = reference_source(bench, x);
      for (int r = 0; r < bench.num_residuals(); ++r) {
        const double n_u = bench.operators()[r].apply([&](int o, int c) { return U(o, c); });
        closure = std::max(closure, std::abs(n_u - fref[r]));
      }
      if (i < 10) {
        const Eigen::VectorXd f = bench.source_term(x);
        for (int r = 0; r < f.size(); ++r) {
          consistency = std::max(consistency, std::abs(f[r] - fref[r]) / std::max(std::abs(fref[r]), 1.0));
        }
      }
      if (bench.kind() == BenchmarkKind::ns2d) {
        const auto jets = bench.exact_jets(x);
        divergence = std::max(divergence, std::abs(jets[0].grad[0] + jets[1].grad[1]));
      }
    }
    out.push_back(make("mms", "closure_max_residual/" + name, closure, 1e-8));
    out.push_back(make("mms", "source_consistency/" + name, consistency, 1e-9));
    if (bench.kind() == BenchmarkKind::ns2d) out.push_back(make("mms", "divergence_free/ns2d", divergence, 1e-9));
  }
  return out;
}

std::vector<CheckResult> amplification_checks() {
  std::vector<CheckResult> out;
  for (double eps : {0.01, 0.1, 1.0}) {
    const auto rep = amplification_probe(eps, 100001);
    const double target = 1.0 / (eps * eps);
    std::ostringstream name;
    name << "second_derivative_ratio/eps=" << eps;
    std::ostringstream detail;
    detail << "ratio=" << rep.ratio << " target=" << target;
    out.push_back(make("amplification", name.str(), std::abs(rep.ratio / target - 1.0), 0.05, detail.str()));
  }
  return out;
}

}  // namespace gcpinn
