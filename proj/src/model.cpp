#include "gcpinn/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gcpinn/errors.hpp"

namespace gcpinn {

namespace {

// tanh(z) and its derivatives up to `highest`, as arrays shaped like z.
std::vector<Eigen::ArrayXXd> tanh_derivatives(const Eigen::ArrayXXd& z, int highest) {
  std::vector<Eigen::ArrayXXd> s(highest + 1);
  s[0] = z.tanh();
  const Eigen::ArrayXXd t2 = s[0].square();
  if (highest >= 1) s[1] = 1.0 - t2;
  if (highest >= 2) s[2] = -2.0 * s[0] * s[1];
  if (highest >= 3) s[3] = s[1] * (6.0 * t2 - 2.0);
  if (highest >= 4) s[4] = s[1] * s[0] * (16.0 - 24.0 * t2);
  return s;
}

int max_term_order(const ChannelSet& channels) {
  int m = 0;
  for (int c = 0; c < channels.size(); ++c) {
    for (const auto& term : channels.terms(c)) m = std::max(m, term.order);
  }
  return m;
}

}  // namespace

void taylor_to_channels(const Taylor<double>& t, const ChannelSet& channels, double* out, int stride) {
  for (int c = 0; c < channels.size(); ++c) {
    const auto& ax = channels.axes(c);
    double v = 0.0;
    switch (ax.size()) {
      case 0: v = t.v; break;
      case 1: v = t.g[ax[0]]; break;
      case 2: v = t.h[ax[0]][ax[1]]; break;
      default: v = t.t[ax[0]][ax[1]][ax[2]]; break;
    }
    out[c * stride] = v;
  }
}

Model::Model(GeometricMapping mapping, DenseNetwork network)
    : mapping_(std::move(mapping)), network_(std::move(network)) {
  if (mapping_.dim() != network_.input_dim()) {
    throw std::invalid_argument("Model: mapping dimension does not match network input");
  }
  if (network_.frontend().enabled() && mapping_.parameter_count() > 0) {
    throw std::invalid_argument("Model: a Fourier frontend requires a parameter-free mapping");
  }
}

std::size_t Model::parameter_count() const {
  return network_.parameter_count() + static_cast<std::size_t>(mapping_.parameter_count());
}

std::vector<double> Model::parameters() const {
  std::vector<double> p(network_.parameters().begin(), network_.parameters().end());
  for (const auto& mp : mapping_.parameters()) p.push_back(mp.value);
  return p;
}

void Model::set_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) throw std::invalid_argument("Model: parameter count mismatch");
  network_.set_parameters(values.first(network_.parameter_count()));
  mapping_.set_parameter_values(values.subspan(network_.parameter_count()));
}

std::vector<char> Model::trainable_mask() const {
  std::vector<char> mask(parameter_count(), 1);
  for (int p = 0; p < mapping_.parameter_count(); ++p) {
    mask[mapping_offset() + p] = mapping_.parameters()[p].trainable ? 1 : 0;
  }
  return mask;
}

Eigen::MatrixXd Model::encode(const Eigen::MatrixXd& points, const ChannelSet& channels, ForwardTape* tape) const {
  const int d = input_dim();
  const int n = static_cast<int>(points.cols());
  const int C = channels.size();
  const int F = network_.feature_dim();
  const int P = mapping_.parameter_count();
  const bool sens = tape != nullptr && mapping_.any_trainable();
  if (points.rows() != d) throw std::invalid_argument("Model::encode: point dimension mismatch");

  Eigen::MatrixXd features(F, static_cast<Eigen::Index>(C) * n);
  if (tape) {
    tape->feature_sens.clear();
    if (sens) tape->feature_sens.assign(P, Eigen::MatrixXd::Zero(F, static_cast<Eigen::Index>(C) * n));
  }
  std::vector<Taylor<double>> xi(d), feat(F), xi_sens(static_cast<std::size_t>(d) * P);
  std::vector<double> vals(C);
  for (int i = 0; i < n; ++i) {
    const double* x = points.col(i).data();
    if (sens) {
      mapping_.map_jets_with_sensitivity(std::span<const double>(x, d), xi, xi_sens);
    } else {
      mapping_.map_jets(std::span<const double>(x, d), xi);
    }
    if (network_.frontend().enabled()) {
      network_.frontend().apply<double>(xi, feat);
    } else {
      for (int k = 0; k < d; ++k) feat[k] = xi[k];
    }
    for (int f = 0; f < F; ++f) {
      taylor_to_channels(feat[f], channels, vals.data(), 1);
      for (int c = 0; c < C; ++c) features(f, static_cast<Eigen::Index>(c) * n + i) = vals[c];
    }
    if (sens) {
      // no frontend here (rejected in the constructor), so features are xi
      for (int k = 0; k < d; ++k) {
        for (int p = 0; p < P; ++p) {
          taylor_to_channels(xi_sens[k * P + p], channels, vals.data(), 1);
          for (int c = 0; c < C; ++c) tape->feature_sens[p](k, static_cast<Eigen::Index>(c) * n + i) = vals[c];
        }
      }
    }
  }
  if (!features.allFinite()) {
    throw EvaluationError(std::string(to_string(mapping_.kind())) + " mapping produced non-finite coordinates");
  }
  return features;
}

Eigen::MatrixXd Model::forward_features(Eigen::MatrixXd A, const ChannelSet& channels, ForwardTape* tape) const {
  const int C = channels.size();
  const Eigen::Index n = A.cols() / C;
  const int L = network_.num_layers();
  const int highest = max_term_order(channels) + (tape ? 1 : 0);
  if (tape) {
    tape->n = static_cast<int>(n);
    tape->inputs.assign(L, {});
    tape->pre.assign(L - 1, {});
    tape->sigma.assign(L - 1, {});
  }
  for (int l = 0; l < L; ++l) {
    Eigen::MatrixXd Z = network_.weight(l) * A;
    Z.leftCols(n).colwise() += network_.bias(l);
    if (tape) tape->inputs[l] = std::move(A);
    if (l + 1 == L) {
      if (!Z.allFinite()) throw EvaluationError("non-finite output in layer " + std::to_string(l));
      return Z;
    }
    auto s = tanh_derivatives(Z.leftCols(n).array(), highest);
    Eigen::MatrixXd Y(Z.rows(), Z.cols());
    for (int c = 0; c < C; ++c) {
      auto Yc = Y.middleCols(c * n, n).array();
      Yc.setZero();
      for (const auto& term : channels.terms(c)) {
        Eigen::ArrayXXd prod = s[term.order];
        for (int b : term.blocks) prod *= Z.middleCols(b * n, n).array();
        Yc += prod;
      }
    }
    if (!Y.allFinite()) throw EvaluationError("non-finite activation in layer " + std::to_string(l));
    if (tape) {
      tape->pre[l] = std::move(Z);
      tape->sigma[l] = std::move(s);
    }
    A = std::move(Y);
  }
  return A;
}

Eigen::MatrixXd Model::forward(const Eigen::MatrixXd& points, const ChannelSet& channels, ForwardTape* tape) const {
  return forward_features(encode(points, channels, tape), channels, tape);
}

void Model::backward(const ForwardTape& tape, const ChannelSet& channels, const Eigen::MatrixXd& d_output,
                     std::span<double> grad) const {
  if (grad.size() != parameter_count()) throw std::invalid_argument("Model::backward: gradient size mismatch");
  const int C = channels.size();
  const Eigen::Index n = tape.n;
  const int L = network_.num_layers();
  const bool need_feature_grad = !tape.feature_sens.empty();

  Eigen::MatrixXd dZ = d_output;
  for (int l = L - 1; l >= 0; --l) {
    if (l + 1 < L) {
      // reverse of the channel-wise tanh expansion
      const Eigen::MatrixXd& Z = tape.pre[l];
      const auto& s = tape.sigma[l];
      const Eigen::MatrixXd& dY = dZ;
      Eigen::MatrixXd dPre = Eigen::MatrixXd::Zero(Z.rows(), Z.cols());
      for (int c = 0; c < C; ++c) {
        const auto dYc = dY.middleCols(c * n, n).array();
        for (const auto& term : channels.terms(c)) {
          const int m = term.order;
          Eigen::ArrayXXd prod = dYc;
          for (int b : term.blocks) prod *= Z.middleCols(b * n, n).array();
          dPre.leftCols(n).array() += prod * s[m + 1];
          for (std::size_t q = 0; q < term.blocks.size(); ++q) {
            Eigen::ArrayXXd other = dYc * s[m];
            for (std::size_t r = 0; r < term.blocks.size(); ++r) {
              if (r != q) other *= Z.middleCols(term.blocks[r] * n, n).array();
            }
            dPre.middleCols(term.blocks[q] * n, n).array() += other;
          }
        }
      }
      dZ = std::move(dPre);
    }
    const Eigen::MatrixXd& A = tape.inputs[l];
    Eigen::Map<RowMatrix> gW(grad.data() + network_.weight_offset(l), network_.layer_out(l), network_.layer_in(l));
    // products land in aligned temporaries first; grad may live anywhere
    const RowMatrix dW = dZ * A.transpose();
    gW += dW;
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + network_.bias_offset(l), network_.layer_out(l));
    const Eigen::VectorXd db = dZ.leftCols(n).rowwise().sum();
    gb += db;
    if (l > 0 || need_feature_grad) {
      Eigen::MatrixXd dA = network_.weight(l).transpose() * dZ;
      if (l == 0) {
        for (std::size_t p = 0; p < tape.feature_sens.size(); ++p) {
          grad[mapping_offset() + p] += (dA.array() * tape.feature_sens[p].array()).sum();
        }
      } else {
        dZ = std::move(dA);
      }
    }
  }
}

Eigen::MatrixXd Model::predict(const Eigen::MatrixXd& points) const {
  const ChannelSet values_only(input_dim(), 0);
  return forward(points, values_only, nullptr);
}

std::vector<Jet> batch_jets_at(const Eigen::MatrixXd& outputs, const ChannelSet& channels, int n, int point) {
  const int d = channels.dim();
  std::vector<Jet> jets;
  for (Eigen::Index o = 0; o < outputs.rows(); ++o) {
    Jet j = Jet::zero(d);
    j.value = outputs(o, point);
    if (channels.order() >= 1) {
      for (int a = 0; a < d; ++a) j.grad[a] = outputs(o, static_cast<Eigen::Index>(channels.first(a)) * n + point);
    }
    if (channels.order() >= 2) {
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
          j.hess(a, b) = outputs(o, static_cast<Eigen::Index>(channels.second(a, b)) * n + point);
        }
      }
    }
    jets.push_back(std::move(j));
  }
  return jets;
}

std::vector<Jet> evaluate_jet(const Model& model, const Eigen::VectorXd& point) {
  const int d = model.input_dim();
  const GeometricMapping& mapping = model.mapping();
  const Eigen::VectorXd xi = mapping.map_point(point);
  const Eigen::MatrixXd J = mapping.jacobian(point);
  const auto H = mapping.hessian(point);
  if (!J.allFinite()) throw EvaluationError(std::string(to_string(mapping.kind())) + " mapping: non-finite Jacobian");

  // network jets in xi-space
  const ChannelSet channels(d, 2);
  const int C = channels.size();
  const auto& net = model.network();
  std::vector<Taylor<double>> vars(d), feat(net.feature_dim());
  for (int a = 0; a < d; ++a) vars[a] = Taylor<double>::variable(d, xi[a], a);
  if (net.frontend().enabled()) {
    net.frontend().apply<double>(vars, feat);
  } else {
    feat = vars;
  }
  Eigen::MatrixXd features(net.feature_dim(), C);
  for (int f = 0; f < net.feature_dim(); ++f) {
    std::vector<double> vals(C);
    taylor_to_channels(feat[f], channels, vals.data(), 1);
    for (int c = 0; c < C; ++c) features(f, c) = vals[c];
  }
  const Eigen::MatrixXd out = model.forward_features(std::move(features), channels, nullptr);
  std::vector<Jet> result;
  for (auto& xi_jet : batch_jets_at(out, channels, 1, 0)) result.push_back(chain_rule(xi_jet, J, H));
  return result;
}

nlohmann::json model_to_json(const Model& model) {
  nlohmann::json j;
  const auto& m = model.mapping();
  nlohmann::json mj;
  mj["kind"] = to_string(m.kind());
  mj["dim"] = m.dim();
  mj["box_lo"] = m.box().lo;
  mj["box_hi"] = m.box().hi;
  mj["origin"] = m.origin();
  mj["segments"] = m.segments();
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : m.parameters()) {
    params.push_back({{"name", p.name}, {"value", p.value}, {"init", p.init}, {"trainable", p.trainable}});
  }
  mj["parameters"] = params;
  j["mapping"] = mj;
  j["network"] = network_to_json(model.network());
  return j;
}

Model model_from_json(const nlohmann::json& j) {
  const auto& mj = j.at("mapping");
  const std::string kind = mj.at("kind").get<std::string>();
  const int dim = mj.at("dim").get<int>();
  DomainBox box{mj.at("box_lo").get<std::vector<double>>(), mj.at("box_hi").get<std::vector<double>>()};
  const auto origin = mj.at("origin").get<std::vector<double>>();
  std::vector<MappingParameter> params;
  for (const auto& p : mj.at("parameters")) {
    params.push_back({p.at("name").get<std::string>(), p.at("value").get<double>(), p.at("init").get<double>(),
                      p.at("trainable").get<bool>()});
  }
  auto init_of = [&](std::size_t i) { return params.at(i).init; };
  GeometricMapping mapping = GeometricMapping::identity(dim);
  if (kind == "identity") {
  } else if (kind == "torus") {
    mapping = GeometricMapping::torus(box);
  } else if (kind == "radial") {
    mapping = GeometricMapping::radial(init_of(0), origin);
  } else if (kind == "local_stretch") {
    std::vector<double> center(dim);
    for (int a = 0; a < dim; ++a) center[a] = init_of(1 + a);
    mapping = GeometricMapping::local_stretch(init_of(0), center, init_of(1 + dim));
  } else if (kind == "pwl") {
    mapping = GeometricMapping::pwl(box, mj.at("segments").get<int>());
  } else if (kind == "saturating") {
    mapping = GeometricMapping::saturating(box, init_of(0), init_of(1));
  } else {
    throw std::invalid_argument("model_from_json: unknown mapping kind " + kind);
  }
  mapping.restore_parameters(params);
  return Model(std::move(mapping), network_from_json(j.at("network")));
}

}  // namespace gcpinn
