#include "gcpinn/jet.hpp"

#include <cmath>
#include <stdexcept>

#include "gcpinn/errors.hpp"

namespace gcpinn {

Jet chain_rule(const Jet& xi_jet, const Eigen::MatrixXd& jacobian,
               const std::vector<Eigen::MatrixXd>& mapping_hessian) {
  const int d = static_cast<int>(jacobian.cols());
  if (jacobian.rows() != xi_jet.grad.size() ||
      static_cast<Eigen::Index>(mapping_hessian.size()) != jacobian.rows()) {
    throw std::invalid_argument("chain_rule: dimension mismatch");
  }
  Jet out = Jet::zero(d);
  out.value = xi_jet.value;
  out.grad = jacobian.transpose() * xi_jet.grad;
  out.hess = jacobian.transpose() * xi_jet.hess * jacobian;
  for (Eigen::Index k = 0; k < jacobian.rows(); ++k) out.hess += xi_jet.grad[k] * mapping_hessian[k];
  // symmetrize rounding noise from the triple product
  out.hess = 0.5 * (out.hess + out.hess.transpose()).eval();
  return out;
}

Jet finite_difference_oracle(const ScalarField& field, const Eigen::VectorXd& point, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_difference_oracle: step must be positive");
  const int d = static_cast<int>(point.size());
  auto eval = [&](const Eigen::VectorXd& p) {
    const double v = field(p);
    if (!std::isfinite(v)) throw EvaluationError("finite_difference_oracle: non-finite field value");
    return v;
  };
  Jet j = Jet::zero(d);
  j.value = eval(point);
  for (int a = 0; a < d; ++a) {
    Eigen::VectorXd p = point, m = point;
    p[a] += step;
    m[a] -= step;
    const double fp = eval(p), fm = eval(m);
    j.grad[a] = (fp - fm) / (2.0 * step);
    j.hess(a, a) = (fp - 2.0 * j.value + fm) / (step * step);
  }
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      Eigen::VectorXd pp = point, pm = point, mp = point, mm = point;
      pp[a] += step; pp[b] += step;
      pm[a] += step; pm[b] -= step;
      mp[a] -= step; mp[b] += step;
      mm[a] -= step; mm[b] -= step;
      const double v = (eval(pp) - eval(pm) - eval(mp) + eval(mm)) / (4.0 * step * step);
      j.hess(a, b) = v;
      j.hess(b, a) = v;
    }
  }
  return j;
}

}  // namespace gcpinn
