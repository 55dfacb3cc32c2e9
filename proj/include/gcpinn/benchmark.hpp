#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gcpinn/channels.hpp"
#include "gcpinn/jet.hpp"
#include "gcpinn/mapping.hpp"
#include "gcpinn/rng.hpp"
#include "gcpinn/taylor.hpp"

namespace gcpinn {

class Model;

/// coeff * d^channel u_output
struct LinearTerm {
  int output;
  int channel;
  double coeff;
};

/// coeff * (d^channel_a u_output_a) * (d^channel_b u_output_b)
struct ProductTerm {
  int output_a;
  int channel_a;
  int output_b;
  int channel_b;
  double coeff;
};

/// One residual component N[u], a sum of linear and bilinear terms in the
/// derivative channels of the outputs. Channels index ChannelSet(dim, 3).
struct ResidualOperator {
  std::vector<LinearTerm> linear;
  std::vector<ProductTerm> products;

  /// channel(output, channel) -> value
  template <class Get>
  double apply(Get&& channel) const {
    double r = 0.0;
    for (const auto& t : linear) r += t.coeff * channel(t.output, t.channel);
    for (const auto& t : products) r += t.coeff * channel(t.output_a, t.channel_a) * channel(t.output_b, t.channel_b);
    return r;
  }

  /// d/dx_axis of this operator (product rule on bilinear terms).
  ResidualOperator derivative(int axis, const ChannelSet& channels) const;
  int max_channel_order(const ChannelSet& channels) const;
};

enum class BenchmarkKind { burgers1d, convdiff1d, helmholtz1d, convdiff2d, ns2d };

/// Dirichlet-type targets for selected outputs at a set of points.
struct BoundarySet {
  Eigen::MatrixXd points;   // d x n
  std::vector<int> outputs; // network outputs constrained here
  Eigen::MatrixXd targets;  // outputs.size() x n
};

/// Steady manufactured-solution problem on a box.
class PdeBenchmark {
 public:
  static PdeBenchmark make(const std::string& name);
  static const std::vector<std::string>& names();

  const std::string& name() const { return name_; }
  BenchmarkKind kind() const { return kind_; }
  int dim() const { return domain_.dim(); }
  const DomainBox& domain() const { return domain_; }
  int operator_order() const { return 2; }
  int num_outputs() const { return num_outputs_; }
  int num_residuals() const { return static_cast<int>(operators_.size()); }
  const std::vector<ResidualOperator>& operators() const { return operators_; }
  const std::map<std::string, double>& coefficients() const { return coeffs_; }
  /// Outputs carrying Dirichlet data on the whole boundary.
  const std::vector<int>& dirichlet_outputs() const { return dirichlet_outputs_; }

  /// Order-3 Taylor expansion of every exact output field at x.
  void exact_taylor(std::span<const double> x, std::span<Taylor<double>> out) const;
  Eigen::VectorXd manufactured_solution(const Eigen::VectorXd& x) const;
  std::vector<Jet> exact_jets(const Eigen::VectorXd& x) const;
  /// Exact solution channels, num_outputs x ChannelSet(dim, 3).size().
  Eigen::MatrixXd exact_channels(const Eigen::VectorXd& x) const;

  /// f = N[u*](x) per residual component.
  Eigen::VectorXd source_term(const Eigen::VectorXd& x) const;
  /// (r, k) = d f_r / d x_k.
  Eigen::MatrixXd source_gradient(const Eigen::VectorXd& x) const;

  /// N[u](x) - f(x) from channel values U (num_outputs x C, C >= second-order set size).
  Eigen::VectorXd residual_from_channels(const Eigen::MatrixXd& U, const Eigen::VectorXd& x) const;
  Eigen::VectorXd residual(const Model& model, const Eigen::VectorXd& x) const;

  /// u - u* for the Dirichlet outputs at a boundary point.
  Eigen::VectorXd boundary_residual(const Model& model, const Eigen::VectorXd& x) const;

  /// Point and output pinned to fix the pressure gauge (NS only).
  bool has_anchor() const { return kind_ == BenchmarkKind::ns2d; }
  Eigen::VectorXd anchor_point() const;
  int anchor_output() const { return 2; }

  Eigen::MatrixXd sample_interior(int n, Rng& rng) const;
  /// 1D: both endpoints (n is ignored). 2D: n points uniform on the perimeter.
  Eigen::MatrixXd sample_boundary(int n, Rng& rng) const;
  /// Dirichlet set on sampled boundary points, plus the gauge anchor when present.
  std::vector<BoundarySet> boundary_sets(int n, Rng& rng) const;

 private:
  PdeBenchmark() = default;

  std::string name_;
  BenchmarkKind kind_ = BenchmarkKind::burgers1d;
  DomainBox domain_;
  int num_outputs_ = 1;
  std::vector<ResidualOperator> operators_;
  std::map<std::string, double> coeffs_;
  std::vector<int> dirichlet_outputs_;
};

/// n i.i.d. uniform points in the open box, d x n.
Eigen::MatrixXd sample_collocation(const DomainBox& box, int n, Rng& rng);

/// Jittered stratified points: one uniform point in each cell of a g^d grid
/// (g = floor(n^(1/d))), the remaining n - g^d points i.i.d. uniform. Every
/// point is marginally uniform; the sample mean has far lower variance.
Eigen::MatrixXd sample_stratified(const DomainBox& box, int n, Rng& rng);

struct AmplificationReport {
  double epsilon = 0.0;
  int grid = 0;
  double fine_max = 0.0;   // max |u_xx| of sin(2 pi x / eps)
  double smooth_max = 0.0; // max |u_xx| of sin(2 pi x)
  double ratio = 0.0;
};

/// Second-derivative amplitudes of the two components of
/// u = sin(2 pi x) + sin(2 pi x / eps) on a uniform grid over [0, 1].
AmplificationReport amplification_probe(double epsilon, int grid);

}  // namespace gcpinn
