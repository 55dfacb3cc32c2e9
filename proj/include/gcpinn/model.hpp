#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "gcpinn/channels.hpp"
#include "gcpinn/jet.hpp"
#include "gcpinn/mapping.hpp"
#include "gcpinn/network.hpp"
#include "json.hpp"

namespace gcpinn {

/// Intermediate state of a batched forward pass, kept for the reverse sweep.
///
/// Every activation matrix stores all derivative channels of all points side
/// by side: column c * n + i holds channel c of point i.
struct ForwardTape {
  int n = 0;
  std::vector<Eigen::MatrixXd> inputs;             // input of each affine layer
  std::vector<Eigen::MatrixXd> pre;                // pre-activation of each hidden layer
  std::vector<std::vector<Eigen::ArrayXXd>> sigma; // tanh derivatives 0..order+1 of each hidden layer
  std::vector<Eigen::MatrixXd> feature_sens;       // d features / d mapping parameter
};

/// Mapping composed with network: u(x) = f(phi(x)).
///
/// The flat parameter vector is the network's (layer-major, weights before
/// biases) followed by the mapping's parameters.
class Model {
 public:
  Model(GeometricMapping mapping, DenseNetwork network);

  const GeometricMapping& mapping() const { return mapping_; }
  GeometricMapping& mapping() { return mapping_; }
  const DenseNetwork& network() const { return network_; }
  DenseNetwork& network() { return network_; }

  int input_dim() const { return network_.input_dim(); }
  int output_dim() const { return network_.output_dim(); }

  std::size_t parameter_count() const;
  std::size_t mapping_offset() const { return network_.parameter_count(); }
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);
  /// 1 where the parameter is updated by optimizers.
  std::vector<char> trainable_mask() const;

  /// Input features (after mapping and frontend) of every point, channel-blocked.
  /// points is d x n. Fills tape->feature_sens when the mapping has trainable parameters.
  Eigen::MatrixXd encode(const Eigen::MatrixXd& points, const ChannelSet& channels, ForwardTape* tape) const;

  /// Network pass over channel-blocked features; returns m x (C n).
  Eigen::MatrixXd forward_features(Eigen::MatrixXd features, const ChannelSet& channels, ForwardTape* tape) const;

  /// encode + forward_features.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& points, const ChannelSet& channels,
                          ForwardTape* tape = nullptr) const;

  /// Accumulates into grad the parameter gradient of a scalar whose gradient
  /// with respect to the output channels is d_output (m x (C n)).
  void backward(const ForwardTape& tape, const ChannelSet& channels, const Eigen::MatrixXd& d_output,
                std::span<double> grad) const;

  /// Output values only, m x n.
  Eigen::MatrixXd predict(const Eigen::MatrixXd& points) const;

 private:
  GeometricMapping mapping_;
  DenseNetwork network_;
};

/// Per-output Jet at one point, composed through the mapping by the chain rule.
std::vector<Jet> evaluate_jet(const Model& model, const Eigen::VectorXd& point);

/// Per-output Jet taken directly from a batched x-space evaluation.
std::vector<Jet> batch_jets_at(const Eigen::MatrixXd& outputs, const ChannelSet& channels, int n, int point);

/// Channel-blocked matrix (1 x C) of a Taylor expansion.
void taylor_to_channels(const Taylor<double>& t, const ChannelSet& channels, double* out, int stride);

nlohmann::json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);

}  // namespace gcpinn
