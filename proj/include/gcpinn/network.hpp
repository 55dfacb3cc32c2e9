#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include "json.hpp"
#include <numbers>
#include <span>
#include <vector>

#include "gcpinn/taylor.hpp"

namespace gcpinn {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Fixed Fourier-feature embedding: [x, sin(2 pi f x), cos(2 pi f x)] per axis.
struct FourierFrontend {
  std::vector<double> frequencies;

  bool enabled() const { return !frequencies.empty(); }
  int output_dim(int input_dim) const {
    return input_dim * (1 + 2 * static_cast<int>(frequencies.size()));
  }

  /// Feature order: the raw inputs, then for each axis all sines followed by all cosines.
  template <class S>
  void apply(std::span<const Taylor<S>> in, std::span<Taylor<S>> out) const {
    const int d = static_cast<int>(in.size());
    const int nf = static_cast<int>(frequencies.size());
    for (int a = 0; a < d; ++a) out[a] = in[a];
    for (int a = 0; a < d; ++a) {
      for (int j = 0; j < nf; ++j) {
        const Taylor<S> arg = in[a] * (2.0 * std::numbers::pi * frequencies[j]);
        out[d + a * 2 * nf + j] = sin(arg);
        out[d + a * 2 * nf + nf + j] = cos(arg);
      }
    }
  }
};

/// Frequencies (0.5, 1.0, ..., 3.0) of the FF-PINN baseline.
FourierFrontend standard_fourier_frontend();

/// Tanh MLP with a linear output layer. Parameters live in one flat vector,
/// layer-major, each layer's row-major weight matrix followed by its bias.
class DenseNetwork {
 public:
  DenseNetwork() = default;
  DenseNetwork(std::vector<int> layer_sizes, FourierFrontend frontend = {});

  /// [input dim, hidden widths..., output dim]; the input dim excludes the frontend.
  const std::vector<int>& layer_sizes() const { return sizes_; }
  const FourierFrontend& frontend() const { return frontend_; }
  int input_dim() const { return sizes_.front(); }
  int feature_dim() const { return frontend_.output_dim(sizes_.front()); }
  int output_dim() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  int layer_in(int l) const { return l == 0 ? feature_dim() : sizes_[l]; }
  int layer_out(int l) const { return sizes_[l + 1]; }

  std::size_t parameter_count() const { return params_.size(); }
  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }
  void set_parameters(std::span<const double> values);

  std::size_t weight_offset(int l) const { return offsets_[l]; }
  std::size_t bias_offset(int l) const { return offsets_[l] + layer_out(l) * layer_in(l); }

  Eigen::Map<const RowMatrix> weight(int l) const {
    return {params_.data() + weight_offset(l), layer_out(l), layer_in(l)};
  }
  Eigen::Map<RowMatrix> weight(int l) { return {params_.data() + weight_offset(l), layer_out(l), layer_in(l)}; }
  Eigen::Map<const Eigen::VectorXd> bias(int l) const { return {params_.data() + bias_offset(l), layer_out(l)}; }
  Eigen::Map<Eigen::VectorXd> bias(int l) { return {params_.data() + bias_offset(l), layer_out(l)}; }

  /// Plain value forward pass for one input point.
  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;

 private:
  std::vector<int> sizes_;
  FourierFrontend frontend_;
  std::vector<std::size_t> offsets_;
  // aligned so that Eigen kernels over the weights reduce in an address-independent order
  std::vector<double, Eigen::aligned_allocator<double>> params_;
};

/// Xavier-uniform weights and zero biases, deterministic in the seed.
DenseNetwork init_network(std::uint64_t seed, std::vector<int> layer_sizes, FourierFrontend frontend = {});

/// Standard backbone sizes: input dim, four hidden layers of 80 units, outputs.
std::vector<int> backbone_sizes(int input_dim, int outputs);

nlohmann::json network_to_json(const DenseNetwork& net);
DenseNetwork network_from_json(const nlohmann::json& j);

}  // namespace gcpinn
