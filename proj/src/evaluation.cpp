#include "gcpinn/evaluation.hpp"

#include <cmath>
#include <stdexcept>

#include "gcpinn/errors.hpp"
#include "gcpinn/loss.hpp"

namespace gcpinn {

MetricSet field_metrics(const FieldSamples& s) {
  const Eigen::Index n = s.value.size();
  const double err_sq = (s.value - s.exact).squaredNorm();
  const double ref_sq = s.exact.squaredNorm();
  const double gerr_sq = (s.grad - s.exact_grad).squaredNorm();
  const double gref_sq = s.exact_grad.squaredNorm();
  if (ref_sq == 0.0) throw EvaluationError("relative metrics undefined: exact field has zero norm");
  MetricSet m;
  m.mse = err_sq / static_cast<double>(n);
  m.rel_l2 = std::sqrt(err_sq / ref_sq);
  m.rel_h1 = std::sqrt((err_sq + gerr_sq) / (ref_sq + gref_sq));
  return m;
}

TestSet make_test_set(const PdeBenchmark& bench, int n_test, std::uint64_t seed) {
  if (n_test < 2) throw std::invalid_argument("make_test_set: n_test must be at least 2");
  TestSet t;
  t.seed = seed;
  Rng rng(seed ^ 0x7465737473657473ULL);
  t.points = sample_collocation(bench.domain(), n_test, rng);
  const int m = bench.num_outputs(), d = bench.dim();
  t.exact.assign(m, Eigen::VectorXd(n_test));
  t.exact_grad.assign(m, Eigen::MatrixXd(d, n_test));
  for (int i = 0; i < n_test; ++i) {
    const auto jets = bench.exact_jets(t.points.col(i));
    for (int o = 0; o < m; ++o) {
      t.exact[o][i] = jets[o].value;
      t.exact_grad[o].col(i) = jets[o].grad;
    }
  }
  return t;
}

TrialMetrics evaluate_on(const Model& model, const PdeBenchmark& bench, const TestSet& test) {
  const int d = bench.dim(), m = bench.num_outputs();
  const Eigen::Index n = test.points.cols();
  const ChannelSet cs(d, 1);
  Eigen::MatrixXd out(m, (d + 1) * n);
  constexpr Eigen::Index kChunk = 1024;
  for (Eigen::Index b = 0; b < n; b += kChunk) {
    const Eigen::Index len = std::min(kChunk, n - b);
    const Eigen::MatrixXd o = model.forward(test.points.middleCols(b, len), cs, nullptr);
    for (int c = 0; c <= d; ++c) out.middleCols(c * n + b, len) = o.middleCols(c * len, len);
  }
  std::vector<FieldSamples> fields(m);
  for (int o = 0; o < m; ++o) {
    auto& f = fields[o];
    f.value = out.row(o).segment(0, n).transpose();
    f.grad.resize(d, n);
    for (int a = 0; a < d; ++a) f.grad.row(a) = out.row(o).segment(cs.first(a) * n, n);
    f.exact = test.exact[o];
    f.exact_grad = test.exact_grad[o];
  }
  TrialMetrics tm;
  tm.seed = test.seed;
  for (const auto& f : fields) tm.components.push_back(field_metrics(f));
  if (m == 1) {
    tm.headline = tm.components[0];
  } else {
    // velocity magnitude of the first two outputs
    auto magnitude = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::MatrixXd& gu,
                         const Eigen::MatrixXd& gv, Eigen::VectorXd& mag, Eigen::MatrixXd& grad) {
      mag = (u.array().square() + v.array().square()).sqrt().matrix();
      grad.resize(d, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        grad.col(i) = mag[i] > 0.0 ? ((u[i] * gu.col(i) + v[i] * gv.col(i)) / mag[i]).eval()
                                   : Eigen::VectorXd::Zero(d);
      }
    };
    FieldSamples s;
    magnitude(fields[0].value, fields[1].value, fields[0].grad, fields[1].grad, s.value, s.grad);
    magnitude(fields[0].exact, fields[1].exact, fields[0].exact_grad, fields[1].exact_grad, s.exact, s.exact_grad);
    tm.headline = field_metrics(s);
  }
  return tm;
}

std::vector<std::uint64_t> default_test_seeds(std::uint64_t seed) { return {seed, seed + 1, seed + 2}; }

EvaluationReport compute_metrics(const Model& model, const PdeBenchmark& bench, int n_test,
                                 std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw std::invalid_argument("compute_metrics: at least one seed is required");
  EvaluationReport r;
  r.n_test = n_test;
  const int m = bench.num_outputs();
  r.field = m == 1 ? "u" : "velocity_magnitude";
  r.component_names = m == 1 ? std::vector<std::string>{"u"} : std::vector<std::string>{"u", "v", "p"};
  r.component_mean.assign(m, {});
  for (auto seed : seeds) r.trials.push_back(evaluate_on(model, bench, make_test_set(bench, n_test, seed)));
  const double k = static_cast<double>(r.trials.size());
  auto add = [k](MetricSet& acc, const MetricSet& v) {
    acc.mse += v.mse / k;
    acc.rel_l2 += v.rel_l2 / k;
    acc.rel_h1 += v.rel_h1 / k;
  };
  for (const auto& t : r.trials) {
    add(r.mean, t.headline);
    for (int o = 0; o < m; ++o) add(r.component_mean[o], t.components[o]);
  }
  return r;
}

nlohmann::json report_to_json(const EvaluationReport& r) {
  auto ms = [](const MetricSet& m) { return nlohmann::json{{"mse", m.mse}, {"rel_l2", m.rel_l2}, {"rel_h1", m.rel_h1}}; };
  nlohmann::json j;
  j["n_test"] = r.n_test;
  j["field"] = r.field;
  j["mse"] = r.mean.mse;
  j["rel_l2"] = r.mean.rel_l2;
  j["rel_h1"] = r.mean.rel_h1;
  nlohmann::json comps = nlohmann::json::object();
  for (std::size_t o = 0; o < r.component_names.size(); ++o) comps[r.component_names[o]] = ms(r.component_mean[o]);
  j["components"] = comps;
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : r.trials) {
    nlohmann::json tj = ms(t.headline);
    tj["seed"] = t.seed;
    nlohmann::json tc = nlohmann::json::object();
    for (std::size_t o = 0; o < r.component_names.size(); ++o) tc[r.component_names[o]] = ms(t.components[o]);
    tj["components"] = tc;
    trials.push_back(tj);
  }
  j["trials"] = trials;
  return j;
}

double effective_rank(std::span<const double> eigenvalues) {
  double total = 0.0;
  for (double l : eigenvalues) total += std::max(l, 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("effective_rank: spectrum is identically zero");
  double entropy = 0.0;
  for (double l : eigenvalues) {
    const double p = std::max(l, 0.0) / total;
    if (p > 0.0) entropy -= p * std::log(p);
  }
  return std::exp(entropy);
}

NtkReport ntk_from_rows(const Eigen::MatrixXd& G) {
  NtkReport r;
  r.kernel = G * G.transpose();
  r.kernel = 0.5 * (r.kernel + r.kernel.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(r.kernel, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw EvaluationError("NTK eigensolver did not converge");
  r.eigenvalues = solver.eigenvalues().reverse();
  r.effective_rank = effective_rank(std::span<const double>(r.eigenvalues.data(), r.eigenvalues.size()));
  return r;
}

NtkReport ntk_matrix(const Model& model, const PdeBenchmark& bench, const Eigen::MatrixXd& points, int workers) {
  if (points.cols() < 1 || points.cols() > 512) throw std::invalid_argument("ntk_matrix: need 1..512 points");
  const LossEvaluator evaluator(bench, workers);
  const ResidualBatch batch = make_residual_batch(bench, points, false);
  const Eigen::MatrixXd J = evaluator.residual_jacobian(model, batch);
  const auto mask = model.trainable_mask();
  std::vector<Eigen::Index> cols;
  for (std::size_t p = 0; p < mask.size(); ++p) {
    if (mask[p]) cols.push_back(static_cast<Eigen::Index>(p));
  }
  Eigen::MatrixXd G(J.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) G.col(static_cast<Eigen::Index>(c)) = J.col(cols[c]);
  return ntk_from_rows(G);
}

}  // namespace gcpinn
