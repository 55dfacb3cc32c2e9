#include "gcpinn/benchmark.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gcpinn/errors.hpp"
#include "gcpinn/model.hpp"

namespace gcpinn {

namespace {

constexpr double kPi = std::numbers::pi;

using T = Taylor<double>;

const ChannelSet& third_order_channels(int dim) {
  static const ChannelSet sets[3] = {ChannelSet(1, 3), ChannelSet(2, 3), ChannelSet(3, 3)};
  return sets[dim - 1];
}

}  // namespace

ResidualOperator ResidualOperator::derivative(int axis, const ChannelSet& channels) const {
  ResidualOperator d;
  auto shift = [&](int c) {
    const int s = channels.shifted(c, axis);
    if (s < 0) throw std::logic_error("ResidualOperator::derivative: channel order exceeds the channel set");
    return s;
  };
  for (const auto& t : linear) d.linear.push_back({t.output, shift(t.channel), t.coeff});
  for (const auto& t : products) {
    d.products.push_back({t.output_a, shift(t.channel_a), t.output_b, t.channel_b, t.coeff});
    d.products.push_back({t.output_a, t.channel_a, t.output_b, shift(t.channel_b), t.coeff});
  }
  return d;
}

int ResidualOperator::max_channel_order(const ChannelSet& channels) const {
  int m = 0;
  for (const auto& t : linear) m = std::max(m, channels.channel_order(t.channel));
  for (const auto& t : products) {
    m = std::max({m, channels.channel_order(t.channel_a), channels.channel_order(t.channel_b)});
  }
  return m;
}

const std::vector<std::string>& PdeBenchmark::names() {
  static const std::vector<std::string> n = {"burgers1d", "convdiff1d", "helmholtz1d", "convdiff2d", "ns2d"};
  return n;
}

PdeBenchmark PdeBenchmark::make(const std::string& name) {
  PdeBenchmark b;
  b.name_ = name;
  if (name == "burgers1d") {
    // -nu u'' + u u' = f
    b.kind_ = BenchmarkKind::burgers1d;
    b.domain_ = DomainBox::unit(1);
    const double nu = 0.1;
    b.coeffs_ = {{"nu", nu}};
    const ChannelSet c(1, 3);
    b.operators_ = {{{{0, c.second(0, 0), -nu}}, {{0, c.value(), 0, c.first(0), 1.0}}}};
  } else if (name == "convdiff1d") {
    // a u' - nu u'' = f
    b.kind_ = BenchmarkKind::convdiff1d;
    b.domain_ = DomainBox::unit(1);
    const double nu = 1e-3, a = 1.0;
    b.coeffs_ = {{"nu", nu}, {"a", a}};
    const ChannelSet c(1, 3);
    b.operators_ = {{{{0, c.first(0), a}, {0, c.second(0, 0), -nu}}, {}}};
  } else if (name == "helmholtz1d") {
    // u'' + k^2 u = f
    b.kind_ = BenchmarkKind::helmholtz1d;
    b.domain_ = DomainBox::unit(1);
    const double k = 10.0, m = 5.0;
    b.coeffs_ = {{"k", k}, {"m", m}};
    const ChannelSet c(1, 3);
    b.operators_ = {{{{0, c.second(0, 0), 1.0}, {0, c.value(), k * k}}, {}}};
  } else if (name == "convdiff2d") {
    // -eps lap u + b . grad u = f
    b.kind_ = BenchmarkKind::convdiff2d;
    b.domain_ = DomainBox::unit(2);
    const double eps = 0.01, bx = 1.0, by = 1.0, amp = 0.8, layer = 0.01;
    b.coeffs_ = {{"eps", eps}, {"bx", bx}, {"by", by}, {"A", amp}, {"eps_layer", layer}};
    const ChannelSet c(2, 3);
    b.operators_ = {{{{0, c.second(0, 0), -eps}, {0, c.second(1, 1), -eps}, {0, c.first(0), bx}, {0, c.first(1), by}},
                     {}}};
  } else if (name == "ns2d") {
    // outputs (u, v, p); steady incompressible Navier-Stokes
    b.kind_ = BenchmarkKind::ns2d;
    b.domain_ = DomainBox::unit(2);
    b.num_outputs_ = 3;
    const double nu = 0.01, rho = 1.0, amp = 0.3, layer = 0.01, pb = 0.5;
    b.coeffs_ = {{"nu", nu}, {"rho", rho}, {"A", amp}, {"eps_layer", layer}, {"B", pb}};
    const ChannelSet c(2, 3);
    const int x = c.first(0), y = c.first(1), xx = c.second(0, 0), yy = c.second(1, 1), v0 = c.value();
    ResidualOperator mx{{{2, x, 1.0 / rho}, {0, xx, -nu}, {0, yy, -nu}}, {{0, v0, 0, x, 1.0}, {1, v0, 0, y, 1.0}}};
    ResidualOperator my{{{2, y, 1.0 / rho}, {1, xx, -nu}, {1, yy, -nu}}, {{0, v0, 1, x, 1.0}, {1, v0, 1, y, 1.0}}};
    ResidualOperator cont{{{0, x, 1.0}, {1, y, 1.0}}, {}};
    b.operators_ = {mx, my, cont};
  } else {
    throw ConfigError("unknown benchmark '" + name + "'");
  }
  b.dirichlet_outputs_ = b.kind_ == BenchmarkKind::ns2d ? std::vector<int>{0, 1} : std::vector<int>{0};
  return b;
}

void PdeBenchmark::exact_taylor(std::span<const double> x, std::span<Taylor<double>> out) const {
  const int d = dim();
  std::vector<T> X(d);
  for (int a = 0; a < d; ++a) X[a] = T::variable(d, x[a], a);
  switch (kind_) {
    case BenchmarkKind::burgers1d:
      out[0] = sin(X[0] * (2.0 * kPi)) + 0.1 * sin(X[0] * (16.0 * kPi));
      break;
    case BenchmarkKind::convdiff1d: {
      const double nu = coeffs_.at("nu"), a = coeffs_.at("a");
      out[0] = sin(X[0] * kPi) + exp(X[0] * (-a / nu));
      break;
    }
    case BenchmarkKind::helmholtz1d:
      out[0] = sin(X[0] * (2.0 * kPi * coeffs_.at("m")));
      break;
    case BenchmarkKind::convdiff2d: {
      const double amp = coeffs_.at("A"), layer = coeffs_.at("eps_layer");
      out[0] = sin(X[0] * kPi) * sin(X[1] * kPi) + amp * exp((X[0] - 1.0) * (1.0 / layer));
      break;
    }
    case BenchmarkKind::ns2d: {
      const double amp = coeffs_.at("A"), layer = coeffs_.at("eps_layer"), pb = coeffs_.at("B");
      const T e = exp((X[0] - 1.0) * (1.0 / layer));
      out[0] = sin(X[1] * kPi) * (amp * e + 1.0);
      out[1] = (amp / (layer * kPi)) * e * (cos(X[1] * kPi) - 1.0);
      out[2] = pb * sin(X[0] * (2.0 * kPi)) * sin(X[1] * (2.0 * kPi));
      break;
    }
  }
}

Eigen::VectorXd PdeBenchmark::manufactured_solution(const Eigen::VectorXd& x) const {
  std::vector<T> t(num_outputs_);
  exact_taylor(std::span<const double>(x.data(), x.size()), t);
  Eigen::VectorXd u(num_outputs_);
  for (int o = 0; o < num_outputs_; ++o) u[o] = t[o].v;
  return u;
}

std::vector<Jet> PdeBenchmark::exact_jets(const Eigen::VectorXd& x) const {
  std::vector<T> t(num_outputs_);
  exact_taylor(std::span<const double>(x.data(), x.size()), t);
  std::vector<Jet> jets;
  for (const auto& ti : t) jets.push_back(to_jet(ti));
  return jets;
}

Eigen::MatrixXd PdeBenchmark::exact_channels(const Eigen::VectorXd& x) const {
  const ChannelSet& cs = third_order_channels(dim());
  std::vector<T> t(num_outputs_);
  exact_taylor(std::span<const double>(x.data(), x.size()), t);
  // row-major fill: taylor_to_channels writes with a stride
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> U(num_outputs_, cs.size());
  for (int o = 0; o < num_outputs_; ++o) taylor_to_channels(t[o], cs, U.row(o).data(), 1);
  return U;
}

Eigen::VectorXd PdeBenchmark::source_term(const Eigen::VectorXd& x) const {
  const Eigen::MatrixXd U = exact_channels(x);
  Eigen::VectorXd f(num_residuals());
  for (int r = 0; r < num_residuals(); ++r) f[r] = operators_[r].apply([&](int o, int c) { return U(o, c); });
  return f;
}

Eigen::MatrixXd PdeBenchmark::source_gradient(const Eigen::VectorXd& x) const {
  const ChannelSet& cs = third_order_channels(dim());
  const Eigen::MatrixXd U = exact_channels(x);
  Eigen::MatrixXd g(num_residuals(), dim());
  for (int r = 0; r < num_residuals(); ++r) {
    for (int k = 0; k < dim(); ++k) {
      g(r, k) = operators_[r].derivative(k, cs).apply([&](int o, int c) { return U(o, c); });
    }
  }
  return g;
}

Eigen::VectorXd PdeBenchmark::residual_from_channels(const Eigen::MatrixXd& U, const Eigen::VectorXd& x) const {
  if (U.rows() != num_outputs_) throw std::invalid_argument("residual_from_channels: output count mismatch");
  Eigen::VectorXd r = source_term(x);
  for (int i = 0; i < num_residuals(); ++i) r[i] = operators_[i].apply([&](int o, int c) { return U(o, c); }) - r[i];
  return r;
}

Eigen::VectorXd PdeBenchmark::residual(const Model& model, const Eigen::VectorXd& x) const {
  if (model.output_dim() != num_outputs_) throw std::invalid_argument("residual: model output arity mismatch");
  const ChannelSet cs(dim(), 2);
  const Eigen::MatrixXd out = model.forward(x, cs, nullptr);  // m x C for a single point
  return residual_from_channels(out, x);
}

Eigen::VectorXd PdeBenchmark::boundary_residual(const Model& model, const Eigen::VectorXd& x) const {
  const Eigen::VectorXd u = model.predict(x).col(0);
  const Eigen::VectorXd exact = manufactured_solution(x);
  Eigen::VectorXd r(dirichlet_outputs_.size());
  for (std::size_t i = 0; i < dirichlet_outputs_.size(); ++i) {
    r[i] = u[dirichlet_outputs_[i]] - exact[dirichlet_outputs_[i]];
  }
  return r;
}

Eigen::VectorXd PdeBenchmark::anchor_point() const {
  return Eigen::Map<const Eigen::VectorXd>(domain_.lo.data(), dim());
}

Eigen::MatrixXd sample_collocation(const DomainBox& box, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_collocation: n must be at least 1");
  const int d = box.dim();
  Eigen::MatrixXd pts(d, n);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) pts(a, i) = box.lo[a] + box.extent(a) * rng.uniform_open();
  }
  return pts;
}

Eigen::MatrixXd sample_stratified(const DomainBox& box, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_stratified: n must be at least 1");
  const int d = box.dim();
  int g = static_cast<int>(std::floor(std::pow(static_cast<double>(n), 1.0 / d)));
  while (std::pow(static_cast<double>(g + 1), d) <= n) ++g;
  while (g > 1 && std::pow(static_cast<double>(g), d) > n) --g;
  int cells = 1;
  for (int a = 0; a < d; ++a) cells *= g;
  Eigen::MatrixXd pts(d, n);
  for (int i = 0; i < cells; ++i) {
    int rem = i;
    for (int a = 0; a < d; ++a) {
      const int k = rem % g;
      rem /= g;
      pts(a, i) = box.lo[a] + box.extent(a) * (k + rng.uniform_open()) / g;
    }
  }
  for (int i = cells; i < n; ++i) {
    for (int a = 0; a < d; ++a) pts(a, i) = box.lo[a] + box.extent(a) * rng.uniform_open();
  }
  return pts;
}

Eigen::MatrixXd PdeBenchmark::sample_interior(int n, Rng& rng) const { return sample_collocation(domain_, n, rng); }

Eigen::MatrixXd PdeBenchmark::sample_boundary(int n, Rng& rng) const {
  const int d = dim();
  if (d == 1) {
    Eigen::MatrixXd pts(1, 2);
    pts << domain_.lo[0], domain_.hi[0];
    return pts;
  }
  if (n < 1) throw std::invalid_argument("sample_boundary: n must be at least 1");
  Eigen::MatrixXd pts(d, n);
  for (int i = 0; i < n; ++i) {
    // pick a face, then a uniform position on it
    const int face = static_cast<int>(rng.below(2 * d));
    const int axis = face / 2;
    for (int a = 0; a < d; ++a) {
      pts(a, i) = a == axis ? (face % 2 ? domain_.hi[a] : domain_.lo[a]) : domain_.lo[a] + domain_.extent(a) * rng.uniform();
    }
  }
  return pts;
}

std::vector<BoundarySet> PdeBenchmark::boundary_sets(int n, Rng& rng) const {
  std::vector<BoundarySet> sets;
  BoundarySet dir;
  dir.points = sample_boundary(n, rng);
  dir.outputs = dirichlet_outputs_;
  dir.targets.resize(dir.outputs.size(), dir.points.cols());
  for (Eigen::Index i = 0; i < dir.points.cols(); ++i) {
    const Eigen::VectorXd u = manufactured_solution(dir.points.col(i));
    for (std::size_t o = 0; o < dir.outputs.size(); ++o) dir.targets(o, i) = u[dir.outputs[o]];
  }
  sets.push_back(std::move(dir));
  if (has_anchor()) {
    BoundarySet pin;
    pin.points = anchor_point();
    pin.outputs = {anchor_output()};
    pin.targets.resize(1, 1);
    pin.targets(0, 0) = manufactured_solution(pin.points.col(0))[anchor_output()];
    sets.push_back(std::move(pin));
  }
  return sets;
}

AmplificationReport amplification_probe(double epsilon, int grid) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("amplification_probe: epsilon must be in (0, 1]");
  if (grid < 2 || (grid - 1) * epsilon < 4.0) {
    throw std::invalid_argument("amplification_probe: grid has fewer than 4 points per fine wavelength");
  }
  AmplificationReport rep;
  rep.epsilon = epsilon;
  rep.grid = grid;
  for (int i = 0; i < grid; ++i) {
    const T x = T::variable(1, static_cast<double>(i) / (grid - 1), 0);
    const T fine = sin(x * (2.0 * kPi / epsilon));
    const T smooth = sin(x * (2.0 * kPi));
    rep.fine_max = std::max(rep.fine_max, std::abs(fine.h[0][0]));
    rep.smooth_max = std::max(rep.smooth_max, std::abs(smooth.h[0][0]));
  }
  rep.ratio = rep.fine_max / rep.smooth_max;
  return rep;
}

}  // namespace gcpinn
