#include "gcpinn/network.hpp"

#include <cmath>
#include <stdexcept>

#include "gcpinn/rng.hpp"

namespace gcpinn {

FourierFrontend standard_fourier_frontend() { return FourierFrontend{{0.5, 1.0, 1.5, 2.0, 2.5, 3.0}}; }

std::vector<int> backbone_sizes(int input_dim, int outputs) { return {input_dim, 80, 80, 80, 80, outputs}; }

DenseNetwork::DenseNetwork(std::vector<int> layer_sizes, FourierFrontend frontend)
    : sizes_(std::move(layer_sizes)), frontend_(std::move(frontend)) {
  if (sizes_.size() < 2) throw std::invalid_argument("DenseNetwork: need at least input and output sizes");
  for (int s : sizes_) {
    if (s < 1) throw std::invalid_argument("DenseNetwork: layer sizes must be >= 1");
  }
  std::size_t offset = 0;
  for (int l = 0; l < num_layers(); ++l) {
    offsets_.push_back(offset);
    offset += static_cast<std::size_t>(layer_out(l)) * (layer_in(l) + 1);
  }
  params_.assign(offset, 0.0);
}

void DenseNetwork::set_parameters(std::span<const double> values) {
  if (values.size() != params_.size()) throw std::invalid_argument("DenseNetwork: parameter count mismatch");
  std::copy(values.begin(), values.end(), params_.begin());
}

Eigen::VectorXd DenseNetwork::forward(const Eigen::VectorXd& input) const {
  const int d = input_dim();
  Eigen::VectorXd a(feature_dim());
  const int nf = static_cast<int>(frontend_.frequencies.size());
  for (int k = 0; k < d; ++k) a[k] = input[k];
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < nf; ++j) {
      const double arg = input[k] * (2.0 * std::numbers::pi * frontend_.frequencies[j]);
      a[d + k * 2 * nf + j] = std::sin(arg);
      a[d + k * 2 * nf + nf + j] = std::cos(arg);
    }
  }
  for (int l = 0; l < num_layers(); ++l) {
    Eigen::VectorXd z = weight(l) * a + bias(l);
    a = l + 1 < num_layers() ? Eigen::VectorXd(z.array().tanh()) : z;
  }
  return a;
}

DenseNetwork init_network(std::uint64_t seed, std::vector<int> layer_sizes, FourierFrontend frontend) {
  DenseNetwork net(std::move(layer_sizes), std::move(frontend));
  Rng rng(seed);
  for (int l = 0; l < net.num_layers(); ++l) {
    const double limit = std::sqrt(6.0 / (net.layer_in(l) + net.layer_out(l)));
    auto W = net.weight(l);
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = rng.uniform(-limit, limit);
    }
    net.bias(l).setZero();
  }
  return net;
}

nlohmann::json network_to_json(const DenseNetwork& net) {
  nlohmann::json j;
  j["layer_sizes"] = net.layer_sizes();
  j["fourier_frequencies"] = net.frontend().frequencies;
  j["parameters"] = std::vector<double>(net.parameters().begin(), net.parameters().end());
  return j;
}

DenseNetwork network_from_json(const nlohmann::json& j) {
  DenseNetwork net(j.at("layer_sizes").get<std::vector<int>>(),
                   FourierFrontend{j.at("fourier_frequencies").get<std::vector<double>>()});
  net.set_parameters(j.at("parameters").get<std::vector<double>>());
  return net;
}

}  // namespace gcpinn
