#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "gcpinn/taylor.hpp"

namespace gcpinn {

/// Value, spatial gradient and spatial Hessian of a scalar field at a point.
struct Jet {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;

  static Jet zero(int dim) {
    return Jet{0.0, Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Zero(dim, dim)};
  }
  int dim() const { return static_cast<int>(grad.size()); }
};

template <class S>
Jet to_jet(const Taylor<S>& t) {
  Jet j = Jet::zero(t.n);
  j.value = value_of(t.v);
  for (int a = 0; a < t.n; ++a) {
    j.grad[a] = value_of(t.g[a]);
    for (int b = 0; b < t.n; ++b) j.hess(a, b) = value_of(t.h[a][b]);
  }
  return j;
}

/// Pulls a xi-space jet back to x-space:
///   grad_x u = J^T grad_xi u
///   hess_x u = J^T hess_xi u J + sum_k (d u / d xi_k) hess_x phi_k
/// where jacobian(k, i) = d phi_k / d x_i and mapping_hessian[k] = hess_x phi_k.
Jet chain_rule(const Jet& xi_jet, const Eigen::MatrixXd& jacobian,
               const std::vector<Eigen::MatrixXd>& mapping_hessian);

using ScalarField = std::function<double(const Eigen::VectorXd&)>;

/// Central-difference approximation of value, gradient and Hessian.
/// Accuracy is O(step^2); the caller keeps the stencil inside the domain.
Jet finite_difference_oracle(const ScalarField& field, const Eigen::VectorXd& point, double step);

}  // namespace gcpinn
