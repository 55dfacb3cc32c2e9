#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "gcpinn/taylor.hpp"

namespace gcpinn {

/// Axis-aligned box [lo, hi] per axis.
struct DomainBox {
  std::vector<double> lo;
  std::vector<double> hi;

  static DomainBox unit(int dim) { return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)}; }
  int dim() const { return static_cast<int>(lo.size()); }
  double extent(int axis) const { return hi[axis] - lo[axis]; }
  std::vector<double> center() const;
};

enum class MappingKind { identity, torus, radial, local_stretch, pwl, saturating };

const char* to_string(MappingKind kind);

struct MappingParameter {
  std::string name;
  double value = 0.0;
  double init = 0.0;
  bool trainable = false;
};

/// Coordinate reparameterization xi = phi(x) applied in front of the network.
///
/// Parameter layouts:
///   radial:        [alpha]
///   local_stretch: [beta, center_0 .. center_{d-1}, amplitude]
///   pwl:           [logit_{axis,segment}] (softmax per axis gives the increments)
///   saturating:    [k, c]
/// identity and torus have no parameters.
class GeometricMapping {
 public:
  static constexpr int kMaxSmoothParams = 5;

  static GeometricMapping identity(int dim);
  static GeometricMapping torus(DomainBox box);
  static GeometricMapping radial(double alpha, std::vector<double> center);
  static GeometricMapping local_stretch(double beta, std::vector<double> center, double amplitude = 1.0);
  static GeometricMapping pwl(DomainBox box, int segments = 16);
  static GeometricMapping saturating(DomainBox box, double k = 50.0, double c = 0.5);

  MappingKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const DomainBox& box() const { return box_; }
  const std::vector<double>& origin() const { return origin_; }
  int segments() const { return segments_; }

  int parameter_count() const { return static_cast<int>(params_.size()); }
  const std::vector<MappingParameter>& parameters() const { return params_; }
  std::vector<double> parameter_values() const;
  void set_parameter_values(std::span<const double> values);
  /// Replaces values, initial values and trainability (names must match).
  void restore_parameters(const std::vector<MappingParameter>& params);
  void set_trainable(bool trainable);
  void set_trainable(int index, bool trainable);
  bool any_trainable() const;

  Eigen::VectorXd map_point(const Eigen::VectorXd& x) const;
  /// (k, i) = d phi_k / d x_i
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
  /// entry k is the Hessian of phi_k with respect to x
  std::vector<Eigen::MatrixXd> hessian(const Eigen::VectorXd& x) const;

  /// Sum of squared deviations of trainable parameters from their initial values.
  double degeneracy_penalty() const;
  /// Gradient of degeneracy_penalty with respect to parameter_values().
  std::vector<double> degeneracy_penalty_gradient() const;

  /// Exact Taylor expansion (order 3) of every output component at x.
  void map_jets(std::span<const double> x, std::span<Taylor<double>> out) const;
  /// As map_jets, plus sens[k * parameter_count() + p] = d(out[k]) / d(param p).
  void map_jets_with_sensitivity(std::span<const double> x, std::span<Taylor<double>> out,
                                 std::span<Taylor<double>> sens) const;

  void validate() const;

 private:
  GeometricMapping(MappingKind kind, int dim) : kind_(kind), dim_(dim) {}

  template <class S>
  void apply_smooth(std::span<const Taylor<S>> x, std::span<const S> p, std::span<Taylor<S>> out) const;
  void apply_torus(std::span<const double> x, std::span<Taylor<double>> out) const;
  void apply_pwl(std::span<const double> x, std::span<Taylor<double>> out,
                 std::span<Taylor<double>> sens) const;

  MappingKind kind_;
  int dim_;
  DomainBox box_;
  std::vector<double> origin_;
  int segments_ = 0;
  std::vector<MappingParameter> params_;
};

/// sin and cos of 2*pi*x with exact argument reduction, so that integer
/// shifts of x give bitwise-identical results and sin is +0 at half turns.
void sincos_turns(double x, double& s, double& c);

}  // namespace gcpinn
