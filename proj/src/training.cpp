#include "gcpinn/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "gcpinn/errors.hpp"

namespace gcpinn {

namespace {

struct MethodInfo {
  Method method;
  const char* name;
  Strategy strategy;
};

constexpr MethodInfo kMethods[] = {
    {Method::gc_torus, "gc-torus", Strategy::vanilla},   {Method::gc_radial, "gc-radial", Strategy::vanilla},
    {Method::gc_local, "gc-local", Strategy::vanilla},   {Method::pinn, "pinn", Strategy::vanilla},
    {Method::ff, "ff", Strategy::vanilla},               {Method::sa, "sa", Strategy::sa},
    {Method::rar, "rar", Strategy::rar},                 {Method::gpinn, "gpinn", Strategy::gpinn},
    {Method::gc_pwl, "gc-pwl", Strategy::vanilla},       {Method::gc_saturating, "gc-saturating", Strategy::vanilla},
};

const MethodInfo& info(Method m) {
  for (const auto& i : kMethods) {
    if (i.method == m) return i;
  }
  throw std::logic_error("unknown method");
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 step so that nearby seeds give unrelated streams
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double clip(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

Method parse_method(const std::string& name) {
  for (const auto& i : kMethods) {
    if (name == i.name) return i.method;
  }
  throw ConfigError("unknown method '" + name + "'");
}

const char* to_string(Method method) { return info(method).name; }

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& i : kMethods) n.emplace_back(i.name);
    return n;
  }();
  return names;
}

Strategy strategy_of(Method method) { return info(method).strategy; }

Sampler parse_sampler(const std::string& name) {
  if (name == "stratified") return Sampler::stratified;
  if (name == "uniform") return Sampler::uniform;
  throw ConfigError("unknown sampler '" + name + "' (expected stratified or uniform)");
}

const char* to_string(Sampler sampler) { return sampler == Sampler::stratified ? "stratified" : "uniform"; }

Model build_model(Method method, const PdeBenchmark& bench, const MethodOptions& options, std::uint64_t seed) {
  const int d = bench.dim();
  const DomainBox& box = bench.domain();
  GeometricMapping mapping = GeometricMapping::identity(d);
  FourierFrontend frontend;
  switch (method) {
    case Method::ff:
      frontend = standard_fourier_frontend();
      break;
    case Method::gc_torus:
      mapping = GeometricMapping::torus(box);
      break;
    case Method::gc_radial:
      // 1D: compactify away from the left end; 2D: around the domain center
      mapping = GeometricMapping::radial(options.alpha, d == 1 ? box.lo : box.center());
      break;
    case Method::gc_local:
      mapping = GeometricMapping::local_stretch(options.beta, box.center());
      break;
    case Method::gc_pwl:
      mapping = GeometricMapping::pwl(box);
      break;
    case Method::gc_saturating:
      mapping = GeometricMapping::saturating(box);
      break;
    default:
      break;
  }
  if (options.train_mapping && (method == Method::gc_radial || method == Method::gc_local)) {
    mapping.set_trainable(true);
  }
  mapping.validate();
  return Model(std::move(mapping), init_network(seed, backbone_sizes(d, bench.num_outputs()), frontend));
}

std::size_t reported_parameter_count(Method method, const Model& model) {
  return model.parameter_count() + (strategy_of(method) == Strategy::sa ? 2 : 0);
}

double gpinn_coefficient(const TrainingSchedule& s, long iteration) {
  if (iteration < s.gpinn.warmup) return 0.0;
  if (iteration >= s.gpinn.warmup + s.gpinn.ramp || s.gpinn.ramp <= 0) return s.gpinn.lambda;
  return s.gpinn.lambda * static_cast<double>(iteration - s.gpinn.warmup) / static_cast<double>(s.gpinn.ramp);
}

void write_convergence_csv(std::ostream& out, const std::vector<LogRow>& rows) {
  out << "iteration,stage,total_loss,residual_loss,bc_loss,reg_loss,gpinn_term,gpinn_ratio,w_res,w_bc,gpinn_coeff,"
         "pool_size,test_rel_l2\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%ld,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%ld,", r.iteration,
                  r.stage.c_str(), r.loss.total, r.loss.residual, r.loss.boundary, r.loss.regularization, r.loss.gpinn,
                  r.loss.gpinn_ratio, r.w_res, r.w_bc, r.gpinn_coeff, r.pool_size);
    out << buf;
    if (!std::isnan(r.test_rel_l2)) {
      std::snprintf(buf, sizeof buf, "%.17g", r.test_rel_l2);
      out << buf;
    }
    out << '\n';
  }
}

Trainer::Trainer(Model& model, const PdeBenchmark& bench, TrainingSchedule schedule, TestError test_error)
    : model_(model),
      bench_(bench),
      schedule_(std::move(schedule)),
      test_error_(std::move(test_error)),
      evaluator_(bench, schedule_.workers),
      rng_(stream_seed(schedule_.seed, 1)) {
  if (model.output_dim() != bench.num_outputs() || model.input_dim() != bench.dim()) {
    throw std::invalid_argument("Trainer: model does not fit the benchmark");
  }
}

std::pair<double, double> Trainer::loss_weights() const {
  if (schedule_.strategy != Strategy::sa) return {1.0, schedule_.bc_weight};
  return {clip(std::exp(state_.log_w_res), schedule_.sa_clip_lo, schedule_.sa_clip_hi),
          clip(std::exp(state_.log_w_bc), schedule_.sa_clip_lo, schedule_.sa_clip_hi)};
}

double Trainer::total_loss(const ResidualBatch& batch, const std::vector<BoundarySet>& boundary, long iteration,
                           bool lbfgs, LossRecord* record, std::span<double> grad) const {
  const auto [w_res, w_bc] = loss_weights();
  LossWeights w;
  w.residual = w_res;
  w.boundary = w_bc;
  w.regularization = schedule_.reg_coeff;
  w.gpinn = (!lbfgs && schedule_.strategy == Strategy::gpinn) ? gpinn_coefficient(schedule_, iteration) : 0.0;
  const bool sa_grad = schedule_.strategy == Strategy::sa && !state_.sa_frozen && !grad.empty();
  const std::size_t P = model_.parameter_count();
  if (!grad.empty() && grad.size() != P + (sa_grad ? 2 : 0)) {
    throw std::invalid_argument("Trainer::total_loss: gradient size mismatch");
  }
  LossRecord rec;
  const double L = evaluator_.evaluate(model_, batch, boundary, w, &rec, grad.empty() ? grad : grad.first(P));
  if (sa_grad) {
    // d/ds of clip(exp(s)) * component; zero where the clip is active
    const double er = std::exp(state_.log_w_res), eb = std::exp(state_.log_w_bc);
    const bool free_r = er > schedule_.sa_clip_lo && er < schedule_.sa_clip_hi;
    const bool free_b = eb > schedule_.sa_clip_lo && eb < schedule_.sa_clip_hi;
    grad[P] = free_r ? er * rec.residual : 0.0;
    grad[P + 1] = free_b ? eb * rec.boundary : 0.0;
  }
  if (record) *record = rec;
  return L;
}

void Trainer::check_divergence(const LossRecord& rec, long iteration) const {
  if (!std::isfinite(rec.total) || rec.total > schedule_.divergence_threshold) {
    std::ostringstream msg;
    msg << "training diverged at iteration " << iteration << ": total=" << rec.total << " residual=" << rec.residual
        << " boundary=" << rec.boundary << " regularization=" << rec.regularization << " gpinn=" << rec.gpinn;
    throw DivergenceError(msg.str());
  }
}

void Trainer::push_row(long iteration, const std::string& stage, const LossRecord& rec, long gpinn_iteration,
                       bool test) {
  LogRow row;
  row.iteration = iteration;
  row.stage = stage;
  row.loss = rec;
  std::tie(row.w_res, row.w_bc) = loss_weights();
  row.gpinn_coeff = (stage == "adam" && schedule_.strategy == Strategy::gpinn)
                        ? gpinn_coefficient(schedule_, gpinn_iteration)
                        : 0.0;
  row.pool_size = state_.pool.size();
  if (test && test_error_) row.test_rel_l2 = test_error_(model_);
  log_.push_back(std::move(row));
}

Eigen::MatrixXd Trainer::draw_points(int n) {
  return schedule_.sampler == Sampler::stratified ? sample_stratified(bench_.domain(), n, rng_)
                                                  : bench_.sample_interior(n, rng_);
}

void Trainer::refine_pool(Rng& rng) {
  const auto& cfg = schedule_.rar;
  const int room = cfg.capacity - state_.pool.size();
  if (room <= 0) return;
  ResidualBatch cand = make_residual_batch(bench_, bench_.sample_interior(cfg.candidates, rng), false);
  const Eigen::VectorXd sq = evaluator_.squared_residuals(model_, cand);
  std::vector<int> order(cand.size());
  std::iota(order.begin(), order.end(), 0);
  const int take = std::min({cfg.add, room, cand.size()});
  std::partial_sort(order.begin(), order.begin() + take, order.end(),
                    [&](int a, int b) { return sq[a] > sq[b] || (sq[a] == sq[b] && a < b); });
  order.resize(take);
  state_.pool = concat(state_.pool, select_columns(cand, order));
}

void Trainer::run_adam_stage() {
  const auto& s = schedule_;
  const std::size_t P = model_.parameter_count();
  const bool sa = s.strategy == Strategy::sa;
  const bool rar = s.strategy == Strategy::rar;
  const bool gp = s.strategy == Strategy::gpinn;
  const std::size_t n = P + (sa ? 2 : 0);

  if (rar && state_.pool.size() == 0) {
    state_.pool = make_residual_batch(bench_, draw_points(s.adam_points), false);
  }
  std::vector<double> x = model_.parameters();
  std::vector<char> mask = model_.trainable_mask();
  if (sa) {
    x.push_back(state_.log_w_res);
    x.push_back(state_.log_w_bc);
    mask.push_back(1);
    mask.push_back(1);
  }
  Adam opt(n, AdamConfig{s.adam_lr});
  std::vector<double> grad(n);
  if (hook_) hook_(0, "adam");

  for (long it = 0; it < s.adam_epochs; ++it) {
    if (rar && it > 0 && it % s.rar.every == 0) refine_pool(rng_);
    ResidualBatch batch;
    if (rar) {
      std::vector<int> idx(s.adam_points);
      for (auto& i : idx) i = static_cast<int>(rng_.below(state_.pool.size()));
      batch = select_columns(state_.pool, idx);
    } else {
      batch = make_residual_batch(bench_, draw_points(s.adam_points), gp);
    }
    const auto boundary = bench_.boundary_sets(s.boundary_points, rng_);
    LossRecord rec;
    try {
      total_loss(batch, boundary, it, false, &rec, grad);
    } catch (const EvaluationError& e) {
      throw DivergenceError(std::string("training diverged at iteration ") + std::to_string(it) + ": " + e.what());
    }
    check_divergence(rec, it);
    push_row(it, "adam", rec, it, it % s.test_every == 0);
    if (sa) {
      // the loss weights ascend while the model descends
      grad[P] = -grad[P];
      grad[P + 1] = -grad[P + 1];
    }
    opt.step(x, grad, mask);
    model_.set_parameters(std::span<const double>(x).first(P));
    if (sa) {
      state_.log_w_res = x[P];
      state_.log_w_bc = x[P + 1];
    }
    if (hook_ && (it + 1) % s.snapshot_every == 0) hook_(it + 1, "adam");
  }
}

LbfgsResult Trainer::run_lbfgs_stage() {
  const auto& s = schedule_;
  state_.sa_frozen = true;
  state_.pool_frozen = true;
  const long base = s.adam_epochs;
  ResidualBatch batch = s.strategy == Strategy::rar && state_.pool.size() > 0
                            ? state_.pool
                            : make_residual_batch(bench_, draw_points(s.lbfgs_points), false);
  const auto boundary = bench_.boundary_sets(s.boundary_points, rng_);

  std::vector<double> x = model_.parameters();
  const std::vector<char> mask = model_.trainable_mask();
  std::vector<LossRecord> recent;
  Objective f = [&](std::span<const double> p, std::span<double> g) {
    model_.set_parameters(p);
    LossRecord rec;
    try {
      total_loss(batch, boundary, base, true, &rec, g);
    } catch (const EvaluationError&) {
      // a trial step left the finite range; the line search backs off
      std::fill(g.begin(), g.end(), 0.0);
      return std::numeric_limits<double>::infinity();
    }
    recent.push_back(rec);
    if (recent.size() > 64) recent.erase(recent.begin());
    return rec.total;
  };

  LossRecord start;
  model_.set_parameters(x);
  total_loss(batch, boundary, base, true, &start, {});
  check_divergence(start, base);
  push_row(base, "lbfgs", start, base, true);

  LbfgsResult result;
  if (s.lbfgs_steps > 0) {
    LbfgsConfig cfg;
    cfg.lr = s.lbfgs_lr;
    cfg.max_iter = s.lbfgs_steps;
    cfg.history = s.lbfgs_history;
    auto on_iter = [&](int iter, double loss) {
      LossRecord rec;
      rec.total = loss;
      for (auto r = recent.rbegin(); r != recent.rend(); ++r) {
        if (r->total == loss) {
          rec = *r;
          break;
        }
      }
      // parameters of the accepted point, for the test error
      const bool test = iter % s.test_every == 0 || iter == s.lbfgs_steps;
      if (test) {
        const auto saved = model_.parameters();
        model_.set_parameters(x);
        push_row(base + iter, "lbfgs", rec, base + iter, true);
        model_.set_parameters(saved);
      } else {
        push_row(base + iter, "lbfgs", rec, base + iter, false);
      }
    };
    result = lbfgs_minimize(f, x, cfg, mask, on_iter);
    model_.set_parameters(x);
    if (!log_.empty() && std::isnan(log_.back().test_rel_l2) && test_error_) {
      log_.back().test_rel_l2 = test_error_(model_);
    }
  } else {
    result.loss = start.total;
    result.stop_reason = "no steps";
  }
  if (hook_) hook_(base + s.lbfgs_steps, "final");
  return result;
}

}  // namespace gcpinn
