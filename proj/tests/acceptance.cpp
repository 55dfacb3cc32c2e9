// Acceptance gate: one PASS/FAIL line per criterion.
//
//   acceptance [--out DIR] [--only 1,2,...]
//
// Training criteria use the desk preset. Exit status is 1 if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gcpinn/checks.hpp"
#include "gcpinn/experiment.hpp"

using namespace gcpinn;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Gate {
  fs::path out;
  std::set<int> only;
  std::vector<std::string> lines;
  int failed = 0;

  bool wanted(int k) const { return only.empty() || only.count(k); }

  void report(int k, const std::string& title, bool pass, const std::string& detail) {
    std::ostringstream line;
    line << "criterion " << k << " [" << (pass ? "PASS" : "FAIL") << "] " << title << ": " << detail;
    std::cout << line.str() << std::endl;
    lines.push_back(line.str());
    if (!pass) ++failed;
  }
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

// Runs a check suite and summarizes failures.
bool suite_passes(const std::string& suite, double limit_s, std::string& detail) {
  const auto t = Clock::now();
  const auto results = run_checks(suite);
  const double dt = seconds_since(t);
  int bad = 0;
  std::ostringstream d;
  for (const auto& r : results) {
    if (r.passed) continue;
    ++bad;
    std::cout << "    failed " << r.suite << "/" << r.name << ": measured " << r.measured << " > " << r.tolerance
              << (r.detail.empty() ? "" : " (" + r.detail + ")") << '\n';
  }
  d << results.size() - bad << "/" << results.size() << " checks pass, " << num(dt) << " s (limit " << limit_s
    << " s)";
  detail = d.str();
  return bad == 0 && dt < limit_s;
}

RunConfig desk(const std::string& bench, const std::string& method, const fs::path& dir) {
  RunConfig c;
  c.benchmark = bench;
  c.method = method;
  apply_preset(c, "desk");
  c.out = dir.string();
  return c;
}

RunOutcome train(const RunConfig& c, bool ntk = false) {
  std::cout << "    training " << c.benchmark << "/" << c.method << " -> " << c.out << std::endl;
  const RunOutcome o = run_experiment(c, c.out, ntk, nullptr);
  std::cout << "    " << c.benchmark << "/" << c.method << ": rel_l2 " << o.report.mean.rel_l2 << ", "
            << num(o.wall_seconds) << " s" << std::endl;
  return o;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  Gate g;
  g.out = "acceptance_runs";
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--out") && i + 1 < argc) {
      g.out = argv[++i];
    } else if (!std::strcmp(argv[i], "--only") && i + 1 < argc) {
      std::stringstream s(argv[++i]);
      for (std::string tok; std::getline(s, tok, ',');) g.only.insert(std::stoi(tok));
    } else {
      std::cerr << "usage: acceptance [--out DIR] [--only 1,2,...]\n";
      return 2;
    }
  }
  fs::create_directories(g.out);
  std::string detail;

  if (g.wanted(1)) {
    const bool ok = suite_passes("derivative", 60.0, detail);
    g.report(1, "derivative correctness (jets and parameter gradients)", ok, detail);
  }
  if (g.wanted(2)) {
    const bool ok = suite_passes("mapping", 10.0, detail);
    g.report(2, "mapping identities", ok, detail);
  }
  if (g.wanted(3)) {
    const bool ok = suite_passes("mms", 30.0, detail);
    g.report(3, "manufactured-solution closure", ok, detail);
  }
  if (g.wanted(4)) {
    const auto t = Clock::now();
    const auto rep = amplification_probe(0.01, 100001);
    const double dt = seconds_since(t);
    const double dev = std::abs(rep.ratio / 1e4 - 1.0);
    g.report(4, "curvature amplification at eps=0.01", dev <= 0.05 && dt < 5.0,
             "ratio " + num(rep.ratio) + " (target 1e4, deviation " + num(dev) + ", limit 0.05), " + num(dt) + " s");
  }

  // Helmholtz runs feed criteria 5 and 7.
  RunOutcome h_pinn, h_torus;
  if (g.wanted(5) || g.wanted(7)) {
    h_pinn = train(desk("helmholtz1d", "pinn", g.out / "helmholtz1d_pinn"));
    h_torus = train(desk("helmholtz1d", "gc-torus", g.out / "helmholtz1d_gc-torus"));
  }
  if (g.wanted(5)) {
    const double gap = h_pinn.report.mean.rel_l2 / h_torus.report.mean.rel_l2;
    const double dt = h_pinn.wall_seconds + h_torus.wall_seconds;
    g.report(5, "helmholtz1d ordering, desk preset", gap >= 5.0 && dt <= 900.0,
             "pinn " + num(h_pinn.report.mean.rel_l2) + ", gc-torus " + num(h_torus.report.mean.rel_l2) + ", gap " +
                 num(gap) + "x (need >= 5x), " + num(dt) + " s (limit 900 s)");
  }

  // convdiff1d runs (with NTK snapshots) feed criteria 6 and 8.
  RunOutcome c_pinn, c_local;
  if (g.wanted(6) || g.wanted(8)) {
    c_pinn = train(desk("convdiff1d", "pinn", g.out / "convdiff1d_pinn"), true);
    c_local = train(desk("convdiff1d", "gc-local", g.out / "convdiff1d_gc-local"), true);
  }
  if (g.wanted(6)) {
    const double gap = c_pinn.report.mean.rel_l2 / c_local.report.mean.rel_l2;
    const double dt = c_pinn.wall_seconds + c_local.wall_seconds;
    g.report(6, "convdiff1d ordering, desk preset", gap >= 3.0 && dt <= 900.0,
             "pinn " + num(c_pinn.report.mean.rel_l2) + ", gc-local " + num(c_local.report.mean.rel_l2) + ", gap " +
                 num(gap) + "x (need >= 3x), " + num(dt) + " s (limit 900 s)");
  }

  if (g.wanted(7)) {
    const RunOutcome sat = train(desk("helmholtz1d", "gc-saturating", g.out / "helmholtz1d_gc-saturating"));
    const RunOutcome pwl = train(desk("helmholtz1d", "gc-pwl", g.out / "helmholtz1d_gc-pwl"));
    const double t = h_torus.report.mean.rel_l2, s = sat.report.mean.rel_l2, p = pwl.report.mean.rel_l2;
    const bool ok = s >= 10.0 * t && t < p && p < s;
    g.report(7, "failure-mapping controls on helmholtz1d, desk preset", ok,
             "gc-torus " + num(t) + ", gc-pwl " + num(p) + ", gc-saturating " + num(s) +
                 " (need saturating >= 10x torus and torus < pwl < saturating)");
  }

  if (g.wanted(8)) {
    // structure on a fresh model, then the trained comparison
    const PdeBenchmark bench = PdeBenchmark::make("convdiff1d");
    const Model m = build_model(Method::gc_local, bench, {}, 3407);
    Rng rng(11);
    const NtkReport r = ntk_matrix(m, bench, bench.sample_interior(64, rng));
    const double asym = (r.kernel - r.kernel.transpose()).cwiseAbs().maxCoeff();
    const double min_eig = r.eigenvalues.minCoeff() / r.eigenvalues.maxCoeff();
    std::vector<double> ev(r.eigenvalues.data(), r.eigenvalues.data() + r.eigenvalues.size());
    std::vector<double> scaled = ev;
    for (auto& v : scaled) v *= 1e7;
    const double scale_dev = std::abs(effective_rank(scaled) - effective_rank(ev));
    const double er_pinn = c_pinn.ntk.back().effective_rank, er_local = c_local.ntk.back().effective_rank;
    const bool ok = asym == 0.0 && min_eig >= -1e-10 && scale_dev <= 1e-9 * effective_rank(ev) && er_local > er_pinn;
    g.report(8, "NTK diagnostics", ok,
             "asymmetry " + num(asym) + ", min/max eigenvalue " + num(min_eig) + ", scale deviation " +
                 num(scale_dev) + ", final effective rank gc-local " + num(er_local) + " vs pinn " + num(er_pinn));
  }

  if (g.wanted(9)) {
    const PdeBenchmark bench = PdeBenchmark::make("helmholtz1d");
    const std::vector<std::pair<std::string, std::size_t>> expected = {
        {"pinn", 19681}, {"ff", 20641}, {"sa", 19683}, {"gc-radial", 19682}, {"gc-local", 19684}};
    bool ok = true;
    std::ostringstream d;
    for (const auto& [name, want] : expected) {
      const Method method = parse_method(name);
      const std::size_t got = reported_parameter_count(method, build_model(method, bench, {}, 1));
      ok = ok && got == want;
      d << name << " " << got << (got == want ? "" : " (expected " + std::to_string(want) + ")") << ", ";
    }
    const Method torus = Method::gc_torus;
    d << "gc-torus " << reported_parameter_count(torus, build_model(torus, bench, {}, 1))
      << " (published 19841 rests on an unstated convention; the torus map itself has no trainable parameters)";
    g.report(9, "parameter counts", ok, d.str());
  }

  if (g.wanted(10)) {
    // reduced budget; same configuration and output directory twice
    RunConfig c = desk("burgers1d", "sa", g.out / "determinism");
    c.adam_epochs = 300;
    c.lbfgs_steps = 30;
    c.workers = 2;
    run_experiment(c, c.out);
    const std::string first = read_file(fs::path(c.out) / "convergence.csv");
    run_experiment(c, c.out);
    const std::string second = read_file(fs::path(c.out) / "convergence.csv");
    g.report(10, "determinism", !first.empty() && first == second,
             "burgers1d/sa, 300 Adam + 30 L-BFGS steps, 2 workers: convergence.csv " +
                 std::string(first == second ? "byte-identical" : "differs") + " (" + std::to_string(first.size()) +
                 " bytes)");
  }

  if (g.wanted(11)) {
    RunConfig c = desk("burgers1d", sweep_method("beta"), g.out / "burgers1d_beta_sweep");
    const std::vector<double> betas = {5, 10, 15, 20, 25, 30, 35};
    std::cout << "    sweeping beta on burgers1d (" << betas.size() << " runs)" << std::endl;
    const auto rows = run_sweep(c, "beta", betas, nullptr);
    std::ostringstream d;
    std::size_t best = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      d << "beta " << rows[i].value << ": " << num(rows[i].metrics.rel_l2) << "; ";
      if (rows[i].metrics.rel_l2 < rows[best].metrics.rel_l2) best = i;
    }
    bool up = false, down = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      (rows[i].metrics.rel_l2 > rows[i - 1].metrics.rel_l2 ? up : down) = true;
    }
    const bool interior = best > 0 && best + 1 < rows.size();
    d << "minimum at beta " << rows[best].value;
    g.report(11, "burgers1d beta sweep shape", up && down && interior, d.str());
  }

  std::ofstream summary(g.out / "summary.txt");
  for (const auto& l : g.lines) summary << l << '\n';
  std::cout << g.lines.size() - g.failed << "/" << g.lines.size() << " criteria pass" << std::endl;
  return g.failed ? 1 : 0;
}
