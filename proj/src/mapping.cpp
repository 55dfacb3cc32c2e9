#include "gcpinn/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gcpinn/errors.hpp"

namespace gcpinn {

namespace {

using SDual = Dual<GeometricMapping::kMaxSmoothParams>;

constexpr double kRadialSeriesRadius = 1e-8;

void require_finite(std::span<const double> x, const char* what) {
  for (double v : x) {
    if (!std::isfinite(v)) throw EvaluationError(std::string(what) + ": non-finite input coordinate");
  }
}

}  // namespace

std::vector<double> DomainBox::center() const {
  std::vector<double> c(lo.size());
  for (std::size_t i = 0; i < lo.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

const char* to_string(MappingKind kind) {
  switch (kind) {
    case MappingKind::identity: return "identity";
    case MappingKind::torus: return "torus";
    case MappingKind::radial: return "radial";
    case MappingKind::local_stretch: return "local_stretch";
    case MappingKind::pwl: return "pwl";
    case MappingKind::saturating: return "saturating";
  }
  return "unknown";
}

void sincos_turns(double x, double& s, double& c) {
  const double r = x - std::nearbyint(x);        // exact, in [-1/2, 1/2]
  const double q = std::nearbyint(4.0 * r);      // quarter turns
  const double theta = 2.0 * std::numbers::pi * (r - 0.25 * q);
  const double s0 = std::sin(theta), c0 = std::cos(theta);
  switch ((static_cast<int>(q) % 4 + 4) % 4) {
    case 0: s = s0; c = c0; break;
    case 1: s = c0; c = -s0; break;
    case 2: s = -s0; c = -c0; break;
    default: s = -c0; c = s0; break;
  }
  s += 0.0;  // -0 -> +0 keeps atan2 on the (-pi, pi] branch
  c += 0.0;
}

GeometricMapping GeometricMapping::identity(int dim) {
  GeometricMapping m(MappingKind::identity, dim);
  m.box_ = DomainBox::unit(dim);
  return m;
}

GeometricMapping GeometricMapping::torus(DomainBox box) {
  GeometricMapping m(MappingKind::torus, box.dim());
  m.box_ = std::move(box);
  return m;
}

GeometricMapping GeometricMapping::radial(double alpha, std::vector<double> center) {
  GeometricMapping m(MappingKind::radial, static_cast<int>(center.size()));
  m.origin_ = std::move(center);
  m.box_ = DomainBox::unit(m.dim_);
  m.params_.push_back({"alpha", alpha, alpha, false});
  m.validate();
  return m;
}

GeometricMapping GeometricMapping::local_stretch(double beta, std::vector<double> center, double amplitude) {
  GeometricMapping m(MappingKind::local_stretch, static_cast<int>(center.size()));
  m.box_ = DomainBox::unit(m.dim_);
  m.params_.push_back({"beta", beta, beta, false});
  for (int a = 0; a < m.dim_; ++a) {
    m.params_.push_back({"center_" + std::to_string(a), center[a], center[a], false});
  }
  m.params_.push_back({"amplitude", amplitude, amplitude, false});
  m.origin_ = std::move(center);
  m.validate();
  return m;
}

GeometricMapping GeometricMapping::pwl(DomainBox box, int segments) {
  if (segments < 1) throw std::invalid_argument("pwl mapping: segments must be >= 1");
  GeometricMapping m(MappingKind::pwl, box.dim());
  m.box_ = std::move(box);
  m.segments_ = segments;
  for (int a = 0; a < m.dim_; ++a) {
    for (int i = 0; i < segments; ++i) {
      m.params_.push_back({"logit_" + std::to_string(a) + "_" + std::to_string(i), 0.0, 0.0, true});
    }
  }
  return m;
}

GeometricMapping GeometricMapping::saturating(DomainBox box, double k, double c) {
  GeometricMapping m(MappingKind::saturating, box.dim());
  m.box_ = std::move(box);
  m.params_.push_back({"k", k, k, false});
  m.params_.push_back({"c", c, c, false});
  return m;
}

std::vector<double> GeometricMapping::parameter_values() const {
  std::vector<double> v;
  v.reserve(params_.size());
  for (const auto& p : params_) v.push_back(p.value);
  return v;
}

void GeometricMapping::set_parameter_values(std::span<const double> values) {
  if (values.size() != params_.size()) throw std::invalid_argument("mapping: parameter count mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) params_[i].value = values[i];
}

void GeometricMapping::restore_parameters(const std::vector<MappingParameter>& params) {
  if (params.size() != params_.size()) throw std::invalid_argument("mapping: parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != params_[i].name) throw std::invalid_argument("mapping: parameter name mismatch");
  }
  params_ = params;
}

void GeometricMapping::set_trainable(bool trainable) {
  for (auto& p : params_) p.trainable = trainable;
}

void GeometricMapping::set_trainable(int index, bool trainable) { params_.at(index).trainable = trainable; }

bool GeometricMapping::any_trainable() const {
  return std::any_of(params_.begin(), params_.end(), [](const auto& p) { return p.trainable; });
}

void GeometricMapping::validate() const {
  switch (kind_) {
    case MappingKind::radial:
      if (!(params_[0].value > 0.0)) throw EvaluationError("radial mapping: alpha must be positive");
      break;
    case MappingKind::local_stretch:
      if (!(params_[0].value > 0.0)) throw EvaluationError("local_stretch mapping: beta must be positive");
      break;
    default:
      break;
  }
  for (const auto& p : params_) {
    if (!std::isfinite(p.value)) throw EvaluationError(std::string(to_string(kind_)) + " mapping: non-finite parameter " + p.name);
  }
}

double GeometricMapping::degeneracy_penalty() const {
  double s = 0.0;
  for (const auto& p : params_) {
    if (p.trainable) s += (p.value - p.init) * (p.value - p.init);
  }
  return s;
}

std::vector<double> GeometricMapping::degeneracy_penalty_gradient() const {
  std::vector<double> g(params_.size(), 0.0);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].trainable) g[i] = 2.0 * (params_[i].value - params_[i].init);
  }
  return g;
}

template <class S>
void GeometricMapping::apply_smooth(std::span<const Taylor<S>> x, std::span<const S> p,
                                    std::span<Taylor<S>> out) const {
  using std::log1p;
  const int d = dim_;
  switch (kind_) {
    case MappingKind::identity:
      for (int k = 0; k < d; ++k) out[k] = x[k];
      return;
    case MappingKind::radial: {
      const S alpha = p[0];
      Taylor<S> y[kMaxDim];
      Taylor<S> r2 = Taylor<S>::constant(d, S(0.0));
      for (int k = 0; k < d; ++k) {
        y[k] = x[k] - origin_[k];
        r2 += y[k] * y[k];
      }
      const S norm = log1p(alpha);
      if (std::sqrt(value_of(r2.v)) < kRadialSeriesRadius) {
        // removable singularity: phi -> alpha y / log(1 + alpha)
        for (int k = 0; k < d; ++k) out[k] = y[k] * (alpha / norm);
        return;
      }
      const Taylor<S> r = d == 1 ? abs(y[0]) : sqrt(r2);
      const Taylor<S> scale = log1p(alpha * r) / (r * norm);
      for (int k = 0; k < d; ++k) out[k] = y[k] * scale;
      return;
    }
    case MappingKind::local_stretch: {
      const S beta = p[0];
      const S amplitude = p[1 + d];
      Taylor<S> y[kMaxDim];
      Taylor<S> r2 = Taylor<S>::constant(d, S(0.0));
      for (int k = 0; k < d; ++k) {
        y[k] = x[k] - p[1 + k];
        r2 += y[k] * y[k];
      }
      const Taylor<S> w = exp(-(beta * r2)) * amplitude;
      // (1 - w) y + w tanh(beta y), re-centred so the far field is exactly x
      for (int k = 0; k < d; ++k) out[k] = x[k] + w * (tanh(beta * y[k]) - y[k]);
      return;
    }
    case MappingKind::saturating: {
      const S k_steep = p[0];
      const S c = p[1];
      for (int a = 0; a < d; ++a) {
        const Taylor<S> xn = (x[a] - box_.lo[a]) * (1.0 / box_.extent(a));
        out[a] = sigmoid(k_steep * (xn - c));
      }
      return;
    }
    default:
      throw std::logic_error("apply_smooth: unsupported mapping kind");
  }
}

void GeometricMapping::apply_torus(std::span<const double> x, std::span<Taylor<double>> out) const {
  for (int a = 0; a < dim_; ++a) {
    const double xn = (x[a] - box_.lo[a]) / box_.extent(a);
    double s, c;
    sincos_turns(xn, s, c);
    Taylor<double> t = Taylor<double>::constant(dim_, std::atan2(s, c) / (2.0 * std::numbers::pi));
    // d/dx of atan2(sin 2 pi u, cos 2 pi u) / (2 pi) is exactly 1 in u
    t.g[a] = 1.0 / box_.extent(a);
    out[a] = t;
  }
}

void GeometricMapping::apply_pwl(std::span<const double> x, std::span<Taylor<double>> out,
                                 std::span<Taylor<double>> sens) const {
  const int K = segments_;
  const int P = parameter_count();
  for (int a = 0; a < dim_; ++a) {
    const MappingParameter* logits = params_.data() + a * K;
    double mx = logits[0].value;
    for (int i = 1; i < K; ++i) mx = std::max(mx, logits[i].value);
    std::vector<double> s(K);
    double total = 0.0;
    for (int i = 0; i < K; ++i) {
      s[i] = std::exp(logits[i].value - mx);
      total += s[i];
    }
    for (double& v : s) v /= total;

    const double L = box_.extent(a);
    const double xn = (x[a] - box_.lo[a]) / L;
    const int seg = std::clamp(static_cast<int>(std::floor(K * xn)), 0, K - 1);
    const double t = K * xn - seg;
    double cumulative = 0.0;
    for (int i = 0; i < seg; ++i) cumulative += s[i];
    const double phi = cumulative + s[seg] * t;
    const double slope = K * s[seg] / L;

    Taylor<double> o = Taylor<double>::constant(dim_, phi);
    o.g[a] = slope;
    out[a] = o;

    if (sens.empty()) continue;
    for (int l = 0; l < P; ++l) {
      auto& ds = sens[a * P + l];
      ds = Taylor<double>::constant(dim_, 0.0);
      if (l < a * K || l >= (a + 1) * K) continue;
      const int j = l - a * K;
      // softmax chain rule: d/dlogit_j = s_j (d/ds_j - sum_i s_i d/ds_i)
      const double dphi_ds = j < seg ? 1.0 : (j == seg ? t : 0.0);
      const double dslope_ds = j == seg ? K / L : 0.0;
      ds.v = s[j] * (dphi_ds - phi);
      ds.g[a] = s[j] * (dslope_ds - slope);
    }
  }
}

void GeometricMapping::map_jets(std::span<const double> x, std::span<Taylor<double>> out) const {
  require_finite(x, to_string(kind_));
  validate();
  if (kind_ == MappingKind::torus) return apply_torus(x, out);
  if (kind_ == MappingKind::pwl) return apply_pwl(x, out, {});
  Taylor<double> xs[kMaxDim];
  for (int a = 0; a < dim_; ++a) xs[a] = Taylor<double>::variable(dim_, x[a], a);
  const auto pv = parameter_values();
  apply_smooth<double>(std::span<const Taylor<double>>(xs, dim_), pv, out);
}

void GeometricMapping::map_jets_with_sensitivity(std::span<const double> x, std::span<Taylor<double>> out,
                                                 std::span<Taylor<double>> sens) const {
  require_finite(x, to_string(kind_));
  validate();
  const int P = parameter_count();
  if (kind_ == MappingKind::pwl) return apply_pwl(x, out, sens);
  if (P == 0) return map_jets(x, out);
  if (P > kMaxSmoothParams) throw std::logic_error("mapping: too many parameters for dual evaluation");

  Taylor<SDual> xs[kMaxDim];
  for (int a = 0; a < dim_; ++a) xs[a] = Taylor<SDual>::variable(dim_, SDual(x[a]), a);
  SDual pd[kMaxSmoothParams];
  for (int p = 0; p < P; ++p) pd[p] = SDual::seed(params_[p].value, p);
  Taylor<SDual> res[kMaxDim];
  apply_smooth<SDual>(std::span<const Taylor<SDual>>(xs, dim_), std::span<const SDual>(pd, P),
                      std::span<Taylor<SDual>>(res, dim_));

  const int n = dim_;
  for (int k = 0; k < dim_; ++k) {
    Taylor<double>& o = out[k];
    o = Taylor<double>::constant(n, res[k].v.v);
    for (int i = 0; i < n; ++i) {
      o.g[i] = res[k].g[i].v;
      for (int j = 0; j < n; ++j) {
        o.h[i][j] = res[k].h[i][j].v;
        for (int l = 0; l < n; ++l) o.t[i][j][l] = res[k].t[i][j][l].v;
      }
    }
    for (int p = 0; p < P; ++p) {
      Taylor<double>& s = sens[k * P + p];
      s = Taylor<double>::constant(n, res[k].v.d[p]);
      for (int i = 0; i < n; ++i) {
        s.g[i] = res[k].g[i].d[p];
        for (int j = 0; j < n; ++j) {
          s.h[i][j] = res[k].h[i][j].d[p];
          for (int l = 0; l < n; ++l) s.t[i][j][l] = res[k].t[i][j][l].d[p];
        }
      }
    }
  }
}

Eigen::VectorXd GeometricMapping::map_point(const Eigen::VectorXd& x) const {
  Taylor<double> out[kMaxDim];
  map_jets(std::span<const double>(x.data(), x.size()), std::span<Taylor<double>>(out, dim_));
  Eigen::VectorXd xi(dim_);
  for (int k = 0; k < dim_; ++k) xi[k] = out[k].v;
  return xi;
}

Eigen::MatrixXd GeometricMapping::jacobian(const Eigen::VectorXd& x) const {
  Taylor<double> out[kMaxDim];
  map_jets(std::span<const double>(x.data(), x.size()), std::span<Taylor<double>>(out, dim_));
  Eigen::MatrixXd J(dim_, dim_);
  for (int k = 0; k < dim_; ++k) {
    for (int i = 0; i < dim_; ++i) J(k, i) = out[k].g[i];
  }
  return J;
}

std::vector<Eigen::MatrixXd> GeometricMapping::hessian(const Eigen::VectorXd& x) const {
  Taylor<double> out[kMaxDim];
  map_jets(std::span<const double>(x.data(), x.size()), std::span<Taylor<double>>(out, dim_));
  std::vector<Eigen::MatrixXd> H(dim_, Eigen::MatrixXd::Zero(dim_, dim_));
  for (int k = 0; k < dim_; ++k) {
    for (int i = 0; i < dim_; ++i) {
      for (int j = 0; j < dim_; ++j) H[k](i, j) = out[k].h[i][j];
    }
  }
  return H;
}

}  // namespace gcpinn
