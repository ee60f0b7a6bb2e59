// Runs the twelve acceptance criteria and prints one PASS/FAIL line for each.
//
// Exit status is 0 when every criterion passes, or when the only failures are listed with
// --allow-fail (used for a criterion whose failure is analysed and documented).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "kacgraze/kacgraze.hpp"

using namespace kacgraze;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] < v[k - 1])) return false;
  return true;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ", ") + fmt(x);
  return "[" + s + "]";
}

unsigned worker_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

Outcome energy_identity() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> pd(0.0, 1.0), vd(-100.0, 100.0),
      td(-std::numbers::pi, std::numbers::pi);
  double worst = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    double p = pd(rng);
    while (p == 0.0) p = pd(rng);
    const ModelParams par(p, 1.0);
    const double v = vd(rng), w = vd(rng), th = td(rng);
    const auto [vs, ws] = collide_pair(v, w, th, par);
    const double rhs = (v * v + w * w) * energy_factor(th, par);
    worst = std::max(worst, std::abs(vs * vs + ws * ws - rhs) / std::max(rhs, 1e-300));
  }
  return {worst <= 1e-12, "max relative error " + fmt(worst)};
}

Outcome kernel_contract() {
  double norm_err = 0.0;
  bool sandwich = true;
  for (double eps : {0.4, 0.2, 0.1, 0.05}) {
    const auto k = make_kernel(eps);
    norm_err = std::max(norm_err, std::abs(k.normalization() - 1.0));
    const double J = sin2cos2_moment(k);
    for (double p : {0.25, 0.5, 1.0}) {
      const ModelParams par(p, 1.0);
      const double L = energy_loss_rate(k, par);
      // both bounds are attained for p = 1, so compare up to roundoff
      const double slack = 1e-12 * L;
      sandwich = sandwich && lower_bound_constant(par) * J <= L + slack && L <= 2.0 * J + slack;
    }
  }
  return {norm_err <= 1e-10 && sandwich,
          "normalization error " + fmt(norm_err) + ", sandwich " + (sandwich ? "holds" : "violated")};
}

Outcome energy_rate_limit() {
  bool ok = true;
  std::string detail;
  for (double p : {0.5, 1.0}) {
    const ModelParams par(p, 1.0);
    std::vector<double> gaps;
    for (double eps : {0.4, 0.2, 0.1, 0.05})
      gaps.push_back(std::abs(energy_loss_rate(make_kernel(eps), par) - 2.0 * (p + 1.0)));
    const double rel = gaps.back() / (2.0 * (p + 1.0));
    ok = ok && strictly_decreasing(gaps) && rel <= 0.02;
    detail += "p=" + fmt(p) + " gaps " + join(gaps) + " rel(0.05)=" + fmt(rel) + "; ";
  }
  return {ok, detail};
}

Outcome stationarity() {
  const auto g = XiGrid::standard();
  double worst = 0.0;
  for (double p : {0.5, 1.0}) {
    const ModelParams par(p, 1.0);
    const auto m = sample_spectral(InitialDatum::equilibrium(), par, g);
    for (double eps : {0.4, 0.2}) {
      WildConfig cfg;
      cfg.threads = worker_threads();
      const auto f = evolve(m, make_kernel(eps), par, 1.0, cfg);
      for (std::size_t j = 0; j < g.size(); ++j) worst = std::max(worst, std::abs(f[j] - m[j]));
    }
  }
  return {worst <= 1e-5, "grid-max deviation " + fmt(worst)};
}

Outcome solver_crossvalidation() {
  const ModelParams par(1.0, 1.0);
  const auto g = XiGrid::standard();
  const auto k = make_kernel(0.4);
  const auto f0 = sample_spectral(InitialDatum::mixture(), par, g);
  WildConfig cfg;
  cfg.threads = worker_threads();
  const auto wild = evolve(f0, k, par, 0.5, cfg);
  const auto rk = collocation_oracle(f0, k, par, 0.5, 200);
  double worst = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) worst = std::max(worst, std::abs(wild[j] - rk[j]));
  return {worst <= 1e-4, "grid-max difference " + fmt(worst)};
}

std::vector<double> ladder_sups(const ExperimentResult& r) {
  std::vector<double> s;
  for (const auto& row : r.rows)
    if (row.extra == "sup") s.push_back(row.metric_value);
  return s;
}

Outcome ladder_outcome(const ExperimentConfig& cfg) {
  const auto r = run_experiment(cfg);
  const auto d = ladder_sups(r);
  const bool ok = d.size() == 3 && strictly_decreasing(d) && d[2] <= 0.5 * d[0];
  return {ok, "p=" + fmt(cfg.p) + " D " + join(d)};
}

Outcome levy_limit() {
  auto cfg = default_config("grazing-levy");
  cfg.threads = worker_threads();
  return ladder_outcome(cfg);
}

Outcome drift_limit() {
  Outcome all{true, ""};
  for (double p : {0.5, 1.0}) {
    auto cfg = default_config("grazing-drift");
    cfg.p = p;
    cfg.threads = worker_threads();
    const auto o = ladder_outcome(cfg);
    all.pass = all.pass && o.pass;
    all.detail += o.detail + "; ";
  }
  return all;
}

Outcome fp_decay() {
  const ModelParams par(1.0, 1.0);
  const auto g = XiGrid::standard();
  const auto f0 = datum_evaluator(InitialDatum::gaussian(), par);
  const Evaluator mp = [par](double xi) { return mp_hat(par, xi); };
  const auto target = tabulate(g, mp, par.q());
  std::vector<double> scaled, l1;
  for (double t : {1.0, 2.0, 3.0, 4.0}) {
    const auto flow = fp_flow(f0, par, t);
    scaled.push_back(fourier_metric(tabulate(g, flow, par.q()), target, par.q()) * std::exp(2.0 * t));
    if (t <= 3.0) l1.push_back(l1_distance(flow, mp, kL1Window, kL1Points));
  }
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  const bool ok = *hi < 1.5 * *lo && strictly_decreasing(l1);
  return {ok, "r e^{2t} " + join(scaled) + ", l1 " + join(l1)};
}

Outcome fp_algebra() {
  double semigroup = 0.0, identity = 0.0, residual = 0.0;
  for (double p : {0.25, 0.5, 1.0}) {
    const ModelParams par(p, 1.0);
    for (int i = 0; i <= 1000; ++i) {
      const auto s = fp_state(par, 0.005 * i);
      identity = std::max(identity, std::abs(std::pow(s.beta, par.q()) +
                                             std::pow(s.gamma, par.q()) - 1.0));
    }
    const auto f0 = datum_evaluator(InitialDatum::mixture(), par);
    for (double t1 : {0.1, 0.7, 1.5})
      for (double t2 : {0.2, 1.1}) {
        const auto composed = fp_flow(fp_flow(f0, par, t1), par, t2);
        for (int i = 0; i <= 400; ++i) {
          const double xi = 0.025 * i;
          semigroup = std::max(semigroup,
                               std::abs(composed(xi) - fp_solution_hat(f0, par, t1 + t2, xi)));
        }
      }
    const auto g0 = datum_evaluator(InitialDatum::gaussian(), par);
    auto field = [&](double t, double xi) { return fp_solution_hat(g0, par, t, xi); };
    for (double t : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0})
      for (double xi : {0.05, 0.2, 0.5, 1.0, 2.0, 4.0})
        residual = std::max(residual, std::abs(fp_residual(field, par, t, xi)));
  }
  const bool ok = semigroup <= 1e-12 && identity <= 1e-12 && residual <= 1e-6;
  return {ok, "semigroup " + fmt(semigroup) + ", beta/gamma " + fmt(identity) + ", residual " +
                  fmt(residual)};
}

Outcome dsmc_consistency() {
  auto cfg = default_config("dsmc-check");
  cfg.p = 1.0;
  cfg.eps_ladder = {0.4};
  cfg.dsmc.n_particles = 100000;
  cfg.dsmc.n_seeds = 16;
  cfg.times = {0.25, 0.5, 1.0};
  cfg.seed = 0;
  cfg.threads = worker_threads();
  const auto r = run_experiment(cfg);
  std::string detail;
  for (const auto& row : r.rows) detail += "t=" + fmt(row.t) + " chf " + fmt(row.metric_value) + "; ";
  for (const auto& f : r.failures) detail += f + "; ";
  return {r.passed(), detail};
}

Outcome alpha_diagnostics() {
  double worst = 0.0;
  for (double p : {0.25, 0.5, 1.0})
    for (double alpha : {0.5, 1.0, 2.0}) {
      const ModelParams par(p, alpha);
      for (auto d : {InitialDatum::equilibrium(), InitialDatum::mixture()})
        worst = std::max(worst,
                         std::abs(alpha_limit(datum_evaluator(d, par), par).value - alpha) / alpha);
    }
  const ModelParams unit(1.0, 1.0);
  const double gauss = alpha_limit(datum_evaluator(InitialDatum::gaussian(), unit), unit).value;
  return {worst <= 0.01 && std::abs(gauss) <= 1e-6,
          "max relative error " + fmt(worst) + ", gaussian " + fmt(gauss)};
}

Outcome attraction() {
  auto cfg = default_config("attract");
  cfg.eps_ladder = {0.2};
  cfg.times = {0.5, 1.0, 2.0};
  cfg.threads = worker_threads();
  const auto r = run_experiment(cfg);
  std::vector<double> v;
  for (const auto& row : r.rows) v.push_back(row.metric_value);
  return {strictly_decreasing(v) && v.size() == 3,
          "exponent " + fmt(r.rows.front().exponent) + ", metric " + join(v)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> allow_fail;
  std::vector<int> only;
  app.add_option("--allow-fail", allow_fail, "Criteria whose failure does not fail the run");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "collision energy identity", 1, energy_identity},
      {2, "kernel contract", 1, kernel_contract},
      {3, "grazing energy-rate limit", 1, energy_rate_limit},
      {4, "stationarity of the Levy equilibrium", 60, stationarity},
      {5, "Wild restart vs collocation", 120, solver_crossvalidation},
      {6, "grazing limit to fractional Fokker-Planck", 600, levy_limit},
      {7, "grazing limit to the drift equation", 600, drift_limit},
      {8, "Fokker-Planck decay to equilibrium", 60, fp_decay},
      {9, "Fokker-Planck algebra", 10, fp_algebra},
      {10, "DSMC consistency", 300, dsmc_consistency},
      {11, "small-xi limit diagnostics", 1, alpha_diagnostics},
      {12, "equilibrium attraction", 300, attraction},
  };

  const std::set<int> allowed(allow_fail.begin(), allow_fail.end());
  const std::set<int> selected(only.begin(), only.end());
  int blocking = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << ": " << o.detail
              << " (" << fmt(secs) << " s, budget " << c.budget_s << " s"
              << (in_time ? "" : ", over budget") << ")";
    if (!pass && allowed.count(c.id)) std::cout << " [known failure, not blocking]";
    std::cout << std::endl;
    if (!pass && !allowed.count(c.id)) ++blocking;
  }
  return blocking == 0 ? 0 : 1;
}
