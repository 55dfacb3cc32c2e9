#include "gcpinn/loss.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gcpinn/errors.hpp"
#include "gcpinn/parallel.hpp"

namespace gcpinn {

namespace {

auto segment(const Eigen::MatrixXd& U, int output, int channel, Eigen::Index n) {
  return U.row(output).segment(channel * n, n).transpose().array();
}

Eigen::ArrayXd apply_batch(const ResidualOperator& op, const Eigen::MatrixXd& U, Eigen::Index n) {
  Eigen::ArrayXd r = Eigen::ArrayXd::Zero(n);
  for (const auto& t : op.linear) r += t.coeff * segment(U, t.output, t.channel, n);
  for (const auto& t : op.products) {
    r += t.coeff * segment(U, t.output_a, t.channel_a, n) * segment(U, t.output_b, t.channel_b, n);
  }
  return r;
}

// D += dR/dU^T g, for R = op(U) evaluated pointwise.
void backprop_operator(const ResidualOperator& op, const Eigen::MatrixXd& U, Eigen::Index n, const Eigen::ArrayXd& g,
                       Eigen::MatrixXd& D) {
  auto add = [&](int o, int c, const Eigen::ArrayXd& v) { D.row(o).segment(c * n, n).array() += v.transpose(); };
  for (const auto& t : op.linear) add(t.output, t.channel, t.coeff * g);
  for (const auto& t : op.products) {
    add(t.output_a, t.channel_a, t.coeff * g * segment(U, t.output_b, t.channel_b, n));
    add(t.output_b, t.channel_b, t.coeff * g * segment(U, t.output_a, t.channel_a, n));
  }
}

struct ChunkState {
  Eigen::Index begin = 0;
  Eigen::Index n = 0;
  ForwardTape tape;
  Eigen::MatrixXd out;
  Eigen::ArrayXXd R;   // components x n
  Eigen::ArrayXXd DR;  // (component * d + axis) x n
  double res_sq = 0.0;
  double grad_sq = 0.0;
  double field_sq = 0.0;
  std::vector<double> grad;
};

}  // namespace

ResidualBatch make_residual_batch(const PdeBenchmark& bench, Eigen::MatrixXd points, bool with_gradient) {
  ResidualBatch b;
  const Eigen::Index n = points.cols();
  const int R = bench.num_residuals(), d = bench.dim();
  b.source.resize(R, n);
  if (with_gradient) b.source_grad.resize(static_cast<Eigen::Index>(R) * d, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd x = points.col(i);
    b.source.col(i) = bench.source_term(x);
    if (with_gradient) {
      const Eigen::MatrixXd g = bench.source_gradient(x);
      for (int r = 0; r < R; ++r) {
        for (int k = 0; k < d; ++k) b.source_grad(r * d + k, i) = g(r, k);
      }
    }
  }
  b.points = std::move(points);
  return b;
}

ResidualBatch select_columns(const ResidualBatch& batch, std::span<const int> idx) {
  ResidualBatch out;
  const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
  out.points.resize(batch.points.rows(), n);
  out.source.resize(batch.source.rows(), n);
  if (batch.has_gradient()) out.source_grad.resize(batch.source_grad.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.points.col(i) = batch.points.col(idx[i]);
    out.source.col(i) = batch.source.col(idx[i]);
    if (batch.has_gradient()) out.source_grad.col(i) = batch.source_grad.col(idx[i]);
  }
  return out;
}

ResidualBatch concat(const ResidualBatch& a, const ResidualBatch& b) {
  if (a.has_gradient() != b.has_gradient()) throw std::invalid_argument("concat: batches differ in source gradients");
  ResidualBatch out;
  out.points.resize(a.points.rows(), a.size() + b.size());
  out.points << a.points, b.points;
  out.source.resize(a.source.rows(), a.size() + b.size());
  out.source << a.source, b.source;
  if (a.has_gradient()) {
    out.source_grad.resize(a.source_grad.rows(), a.size() + b.size());
    out.source_grad << a.source_grad, b.source_grad;
  }
  return out;
}

LossEvaluator::LossEvaluator(const PdeBenchmark& bench, int workers, int chunk)
    : bench_(bench), workers_(std::max(1, workers)), chunk_(std::max(1, chunk)) {}

double LossEvaluator::evaluate(const Model& model, const ResidualBatch& batch,
                               const std::vector<BoundarySet>& boundary, const LossWeights& weights,
                               LossRecord* record, std::span<double> grad) const {
  const int d = bench_.dim();
  const int R = bench_.num_residuals();
  const int m = model.output_dim();
  const bool use_g = weights.gpinn > 0.0;
  const bool want_grad = !grad.empty();
  const std::size_t P = model.parameter_count();
  if (batch.size() < 1) throw std::invalid_argument("LossEvaluator: empty residual batch");
  if (want_grad && grad.size() != P) throw std::invalid_argument("LossEvaluator: gradient size mismatch");
  if (use_g && !batch.has_gradient()) throw std::invalid_argument("LossEvaluator: gPINN needs source gradients");

  const ChannelSet cs(d, use_g ? 3 : 2);
  const ChannelSet cs3(d, 3);
  std::vector<ResidualOperator> dops;
  if (use_g) {
    for (int r = 0; r < R; ++r) {
      for (int k = 0; k < d; ++k) dops.push_back(bench_.operators()[r].derivative(k, cs3));
    }
  }

  const Eigen::Index N = batch.size();
  const int chunks = static_cast<int>((N + chunk_ - 1) / chunk_);
  std::vector<ChunkState> st(chunks);

  auto forward_chunk = [&](int c) {
    ChunkState& s = st[c];
    s.begin = static_cast<Eigen::Index>(c) * chunk_;
    s.n = std::min<Eigen::Index>(chunk_, N - s.begin);
    s.out = model.forward(batch.points.middleCols(s.begin, s.n), cs, want_grad ? &s.tape : nullptr);
    s.R.resize(R, s.n);
    for (int r = 0; r < R; ++r) {
      s.R.row(r) = (apply_batch(bench_.operators()[r], s.out, s.n) -
                    batch.source.row(r).segment(s.begin, s.n).transpose().array())
                       .transpose();
    }
    s.res_sq = s.R.square().sum();
    if (use_g) {
      s.DR.resize(static_cast<Eigen::Index>(R) * d, s.n);
      for (int rk = 0; rk < R * d; ++rk) {
        s.DR.row(rk) = (apply_batch(dops[rk], s.out, s.n) -
                        batch.source_grad.row(rk).segment(s.begin, s.n).transpose().array())
                           .transpose();
      }
      s.grad_sq = s.DR.square().sum();
      s.field_sq = 0.0;
      for (int o = 0; o < m; ++o) {
        for (int k = 0; k < d; ++k) s.field_sq += segment(s.out, o, cs.first(k), s.n).square().sum();
      }
    }
  };

  // output-space gradient scales, filled once the global sums are known
  double cR = 0.0, cG = 0.0, cE = 0.0;
  auto backward_chunk = [&](int c) {
    ChunkState& s = st[c];
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m, s.out.cols());
    for (int r = 0; r < R; ++r) backprop_operator(bench_.operators()[r], s.out, s.n, cR * s.R.row(r).transpose(), D);
    if (cG != 0.0) {
      for (int rk = 0; rk < R * d; ++rk) backprop_operator(dops[rk], s.out, s.n, cG * s.DR.row(rk).transpose(), D);
    }
    if (cE != 0.0) {
      for (int o = 0; o < m; ++o) {
        for (int k = 0; k < d; ++k) D.row(o).segment(cs.first(k) * s.n, s.n) += cE * s.out.row(o).segment(cs.first(k) * s.n, s.n);
      }
    }
    s.grad.assign(P, 0.0);
    model.backward(s.tape, cs, D, s.grad);
    s.tape = ForwardTape{};
  };

  if (!want_grad || use_g) {
    parallel_for(chunks, workers_, forward_chunk);
  }

  double res_sq = 0.0, grad_sq = 0.0, field_sq = 0.0;
  auto reduce_scalars = [&] {
    res_sq = grad_sq = field_sq = 0.0;
    for (const auto& s : st) {
      res_sq += s.res_sq;
      grad_sq += s.grad_sq;
      field_sq += s.field_sq;
    }
  };

  const double inv_n = 1.0 / static_cast<double>(N);
  cR = weights.residual * 2.0 * inv_n;
  double gpinn_term = 0.0, ratio = 0.0;
  if (use_g) {
    reduce_scalars();
    const double G = grad_sq * inv_n, E = field_sq * inv_n;
    const double den = E + kGpinnDenominatorGuard;
    ratio = G / den;
    if (ratio < kGpinnClip) {
      gpinn_term = weights.gpinn * ratio;
      cG = weights.gpinn / den * 2.0 * inv_n;
      cE = -weights.gpinn * G / (den * den) * 2.0 * inv_n;
    } else {
      gpinn_term = weights.gpinn * kGpinnClip;
    }
  }

  if (want_grad) {
    if (use_g) {
      parallel_for(chunks, workers_, backward_chunk);
    } else {
      parallel_for(chunks, workers_, [&](int c) {
        forward_chunk(c);
        backward_chunk(c);
      });
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const auto& s : st) {
      for (std::size_t p = 0; p < P; ++p) grad[p] += s.grad[p];
    }
  }
  if (!use_g) reduce_scalars();
  const double residual = res_sq * inv_n;

  // boundary terms, sequential and in set order
  double boundary_loss = 0.0;
  const ChannelSet cs0(d, 0);
  std::vector<double> bgrad(want_grad ? P : 0);
  for (const auto& set : boundary) {
    const Eigen::Index nb = set.points.cols();
    if (nb == 0) continue;
    ForwardTape tape;
    const Eigen::MatrixXd out = model.forward(set.points, cs0, want_grad ? &tape : nullptr);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m, nb);
    double sq = 0.0;
    for (std::size_t o = 0; o < set.outputs.size(); ++o) {
      const Eigen::RowVectorXd B = out.row(set.outputs[o]) - set.targets.row(o);
      sq += B.squaredNorm();
      D.row(set.outputs[o]) += weights.boundary * 2.0 / static_cast<double>(nb) * B;
    }
    boundary_loss += sq / static_cast<double>(nb);
    if (want_grad) {
      std::fill(bgrad.begin(), bgrad.end(), 0.0);
      model.backward(tape, cs0, D, bgrad);
      for (std::size_t p = 0; p < P; ++p) grad[p] += bgrad[p];
    }
  }

  const GeometricMapping& mapping = model.mapping();
  const double reg = mapping.degeneracy_penalty();
  if (want_grad && weights.regularization != 0.0) {
    const auto rg = mapping.degeneracy_penalty_gradient();
    for (std::size_t p = 0; p < rg.size(); ++p) grad[model.mapping_offset() + p] += weights.regularization * rg[p];
  }

  const double total =
      weights.residual * residual + weights.boundary * boundary_loss + weights.regularization * reg + gpinn_term;
  if (!std::isfinite(total)) {
    std::ostringstream msg;
    msg << "non-finite loss: residual=" << residual << " boundary=" << boundary_loss << " regularization=" << reg
        << " gpinn=" << gpinn_term;
    throw EvaluationError(msg.str());
  }
  if (want_grad) {
    for (std::size_t p = 0; p < P; ++p) {
      if (!std::isfinite(grad[p])) throw EvaluationError("non-finite gradient at parameter index " + std::to_string(p));
    }
  }
  if (record) {
    record->total = total;
    record->residual = residual;
    record->boundary = boundary_loss;
    record->regularization = reg;
    record->gpinn = gpinn_term;
    record->gpinn_ratio = ratio;
  }
  return total;
}

Eigen::VectorXd LossEvaluator::squared_residuals(const Model& model, const ResidualBatch& batch) const {
  const ChannelSet cs(bench_.dim(), 2);
  const int R = bench_.num_residuals();
  const Eigen::Index N = batch.size();
  const int chunks = static_cast<int>((N + chunk_ - 1) / chunk_);
  Eigen::VectorXd out(N);
  parallel_for(chunks, workers_, [&](int c) {
    const Eigen::Index begin = static_cast<Eigen::Index>(c) * chunk_;
    const Eigen::Index n = std::min<Eigen::Index>(chunk_, N - begin);
    const Eigen::MatrixXd U = model.forward(batch.points.middleCols(begin, n), cs, nullptr);
    Eigen::ArrayXd sq = Eigen::ArrayXd::Zero(n);
    for (int r = 0; r < R; ++r) {
      sq += (apply_batch(bench_.operators()[r], U, n) - batch.source.row(r).segment(begin, n).transpose().array())
                .square();
    }
    out.segment(begin, n) = sq.matrix();
  });
  return out;
}

Eigen::MatrixXd LossEvaluator::residual_jacobian(const Model& model, const ResidualBatch& batch) const {
  const ChannelSet cs(bench_.dim(), 2);
  const int R = bench_.num_residuals();
  const std::size_t P = model.parameter_count();
  Eigen::MatrixXd J(static_cast<Eigen::Index>(batch.size()) * R, static_cast<Eigen::Index>(P));
  parallel_for(batch.size(), workers_, [&](int i) {
    ForwardTape tape;
    const Eigen::MatrixXd U = model.forward(batch.points.col(i), cs, &tape);
    std::vector<double> row(P);
    for (int r = 0; r < R; ++r) {
      Eigen::MatrixXd D = Eigen::MatrixXd::Zero(U.rows(), U.cols());
      backprop_operator(bench_.operators()[r], U, 1, Eigen::ArrayXd::Ones(1), D);
      std::fill(row.begin(), row.end(), 0.0);
      model.backward(tape, cs, D, row);
      J.row(static_cast<Eigen::Index>(i) * R + r) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), P);
    }
  });
  return J;
}

}  // namespace gcpinn
