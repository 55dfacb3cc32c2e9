#include "gcpinn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace gcpinn {

Adam::Adam(std::size_t n, AdamConfig config) : config_(config), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad, std::span<const char> mask) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw std::invalid_argument("Adam: size mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grad[i];
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
    params[i] -= config_.lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + config_.eps);
  }
}

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double cubic_interpolate(double x1, double f1, double g1, double x2, double f2, double g2, double lo, double hi) {
  const double d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2);
  const double d2_sq = d1 * d1 - g1 * g2;
  if (d2_sq >= 0.0) {
    const double d2 = std::sqrt(d2_sq);
    const double pos = x1 <= x2 ? x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2))
                                : x1 - (x1 - x2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2));
    if (std::isfinite(pos)) return std::min(std::max(pos, lo), hi);
  }
  return 0.5 * (lo + hi);
}

double cubic_interpolate(double x1, double f1, double g1, double x2, double f2, double g2) {
  return cubic_interpolate(x1, f1, g1, x2, f2, g2, std::min(x1, x2), std::max(x1, x2));
}

struct Point {
  double t = 0.0;
  double f = 0.0;
  Vec g;
  double gtd = 0.0;
};

struct LineSearchResult {
  Point best;
  int evaluations = 0;
};

LineSearchResult strong_wolfe(const std::function<Point(double)>& eval, const Vec& d, const Point& start,
                              double t, const LbfgsConfig& cfg) {
  const double d_norm = max_abs(d);
  const double f0 = start.f, gtd0 = start.gtd;
  LineSearchResult res;
  Point cur = eval(t);
  res.evaluations = 1;
  Point prev = start;
  std::vector<Point> bracket;
  bool done = false;
  int ls_iter = 0;
  while (ls_iter < cfg.max_line_search) {
    if (cur.f > f0 + cfg.c1 * cur.t * gtd0 || (ls_iter > 1 && cur.f >= prev.f)) {
      bracket = {prev, cur};
      break;
    }
    if (std::abs(cur.gtd) <= -cfg.c2 * gtd0) {
      bracket = {cur};
      done = true;
      break;
    }
    if (cur.gtd >= 0.0) {
      bracket = {prev, cur};
      break;
    }
    const double min_step = cur.t + 0.01 * (cur.t - prev.t);
    const double max_step = cur.t * 10.0;
    const double next = cubic_interpolate(prev.t, prev.f, prev.gtd, cur.t, cur.f, cur.gtd, min_step, max_step);
    prev = std::move(cur);
    cur = eval(next);
    ++res.evaluations;
    ++ls_iter;
  }
  if (ls_iter == cfg.max_line_search) bracket = {start, cur};

  // zoom
  bool insufficient_progress = false;
  int low = 0, high = 1;
  if (bracket.size() == 2 && bracket[0].f > bracket[1].f) std::swap(low, high);
  while (!done && ls_iter < cfg.max_line_search && bracket.size() == 2) {
    if (std::abs(bracket[1].t - bracket[0].t) * d_norm < cfg.tolerance_change) break;
    double tn = cubic_interpolate(bracket[0].t, bracket[0].f, bracket[0].gtd, bracket[1].t, bracket[1].f,
                                  bracket[1].gtd);
    const double bmax = std::max(bracket[0].t, bracket[1].t), bmin = std::min(bracket[0].t, bracket[1].t);
    const double eps = 0.1 * (bmax - bmin);
    if (std::min(bmax - tn, tn - bmin) < eps) {
      if (insufficient_progress || tn >= bmax || tn <= bmin) {
        tn = std::abs(tn - bmax) < std::abs(tn - bmin) ? bmax - eps : bmin + eps;
        insufficient_progress = false;
      } else {
        insufficient_progress = true;
      }
    } else {
      insufficient_progress = false;
    }
    Point p = eval(tn);
    ++res.evaluations;
    ++ls_iter;
    if (p.f > f0 + cfg.c1 * p.t * gtd0 || p.f >= bracket[low].f) {
      bracket[high] = std::move(p);
      if (bracket[0].f <= bracket[1].f) {
        low = 0;
        high = 1;
      } else {
        low = 1;
        high = 0;
      }
    } else {
      if (std::abs(p.gtd) <= -cfg.c2 * gtd0) {
        done = true;
      } else if (p.gtd * (bracket[high].t - bracket[low].t) >= 0.0) {
        bracket[high] = bracket[low];
      }
      bracket[low] = std::move(p);
    }
  }
  res.best = bracket.size() == 1 ? bracket[0] : bracket[low];
  return res;
}

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& f, std::vector<double>& x, const LbfgsConfig& cfg,
                           std::span<const char> mask, const std::function<void(int, double)>& on_iteration) {
  const std::size_t n = x.size();
  if (!mask.empty() && mask.size() != n) throw std::invalid_argument("lbfgs_minimize: mask size mismatch");
  LbfgsResult result;
  auto masked = [&](Vec& g) {
    if (mask.empty()) return;
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask[i]) g[i] = 0.0;
    }
  };

  Vec g(n);
  double loss = f(x, g);
  masked(g);
  result.evaluations = 1;
  result.loss = loss;
  if (max_abs(g) <= cfg.tolerance_grad) {
    result.stop_reason = "gradient tolerance";
    return result;
  }

  std::deque<Vec> dirs, steps;
  std::deque<double> ro;
  Vec d(n), prev_g(n), trial(n), gtrial(n);
  double h_diag = 1.0, t = 0.0;
  int iter = 0;
  result.stop_reason = "iteration limit";
  while (iter < cfg.max_iter) {
    ++iter;
    if (iter == 1) {
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
    } else {
      Vec y(n), s(n);
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = g[i] - prev_g[i];
        s[i] = d[i] * t;
      }
      const double ys = dot(y, s);
      if (ys > 1e-10) {
        if (static_cast<int>(dirs.size()) == cfg.history) {
          dirs.pop_front();
          steps.pop_front();
          ro.pop_front();
        }
        h_diag = ys / dot(y, y);
        dirs.push_back(std::move(y));
        steps.push_back(std::move(s));
        ro.push_back(1.0 / ys);
      }
      // two-loop recursion
      Vec q(n);
      for (std::size_t i = 0; i < n; ++i) q[i] = -g[i];
      std::vector<double> al(dirs.size());
      for (int k = static_cast<int>(dirs.size()) - 1; k >= 0; --k) {
        al[k] = dot(steps[k], q) * ro[k];
        for (std::size_t i = 0; i < n; ++i) q[i] -= al[k] * dirs[k][i];
      }
      for (std::size_t i = 0; i < n; ++i) d[i] = q[i] * h_diag;
      for (std::size_t k = 0; k < dirs.size(); ++k) {
        const double be = dot(dirs[k], d) * ro[k];
        for (std::size_t i = 0; i < n; ++i) d[i] += steps[k][i] * (al[k] - be);
      }
    }
    prev_g = g;
    const double prev_loss = loss;
    if (iter == 1) {
      double l1 = 0.0;
      for (double v : g) l1 += std::abs(v);
      t = std::min(1.0, 1.0 / l1) * cfg.lr;
    } else {
      t = cfg.lr;
    }
    const double gtd = dot(g, d);
    if (gtd > -cfg.tolerance_change) {
      result.stop_reason = "not a descent direction";
      --iter;
      break;
    }

    auto eval = [&](double step) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + step * d[i];
      Point p;
      p.t = step;
      p.g.assign(n, 0.0);
      p.f = f(trial, p.g);
      masked(p.g);
      p.gtd = dot(p.g, d);
      return p;
    };
    Point start{0.0, loss, g, gtd};
    auto ls = strong_wolfe(eval, d, start, t, cfg);
    result.evaluations += ls.evaluations;
    if (ls.best.t == 0.0 || !(ls.best.f < prev_loss)) {
      result.stop_reason = "line search failed";
      --iter;
      break;
    }
    t = ls.best.t;
    for (std::size_t i = 0; i < n; ++i) x[i] += t * d[i];
    loss = ls.best.f;
    g = std::move(ls.best.g);
    result.iterations = iter;
    result.loss = loss;
    if (on_iteration) on_iteration(iter, loss);

    if (max_abs(g) <= cfg.tolerance_grad) {
      result.stop_reason = "gradient tolerance";
      break;
    }
    double step_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) step_max = std::max(step_max, std::abs(d[i] * t));
    if (step_max <= cfg.tolerance_change) {
      result.stop_reason = "step tolerance";
      break;
    }
  }
  result.iterations = iter;
  result.loss = loss;
  return result;
}

}  // namespace gcpinn
