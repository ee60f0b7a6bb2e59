#pragma once

// Experiment drivers: configuration, hypothesis gates, the five runs and CSV output.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kacgraze/analysis.hpp"
#include "kacgraze/dsmc.hpp"
#include "kacgraze/error.hpp"
#include "kacgraze/fokker_planck.hpp"
#include "kacgraze/kernel.hpp"
#include "kacgraze/model.hpp"
#include "kacgraze/wild.hpp"

namespace kacgraze {

struct GridSpec {
  double xi_min = 1e-4;
  double xi_max = 32.0;
  std::size_t count = 256;
};

struct DsmcSpec {
  std::size_t n_particles = 100000;
  std::size_t n_seeds = 16;
  // Macro-step length. Poisson counts add up over sub-steps, so it only bounds the
  // number of events drawn at once.
  double dt = 0.05;
};

struct ExperimentConfig {
  std::string experiment;
  double p = 1.0;
  double alpha = 1.0;
  std::vector<double> eps_ladder{0.4, 0.2, 0.1};
  std::vector<double> times{0.25, 0.5, 1.0};
  GridSpec grid;
  WildConfig wild;
  DsmcSpec dsmc;
  std::string datum_tag = "mixture";
  nlohmann::json datum_params = nlohmann::json::object();
  std::uint64_t seed = 0;
  unsigned threads = 1;

  ModelParams params() const { return {p, alpha}; }
  XiGrid make_grid() const { return {grid.xi_min, grid.xi_max, grid.count}; }

  InitialDatum datum() const {
    const auto scale = [&](const char* key, double fallback) {
      return datum_params.is_object() && datum_params.contains(key)
                 ? datum_params.at(key).get<double>()
                 : fallback;
    };
    if (datum_tag == "equilibrium") return InitialDatum::equilibrium(scale("alpha", 0.0));
    if (datum_tag == "mixture") return InitialDatum::mixture();
    if (datum_tag == "convolution") return InitialDatum::convolution();
    if (datum_tag == "gaussian") return InitialDatum::gaussian(scale("scale", 1.0));
    throw DomainError("config: unknown datum tag '" + datum_tag + "'");
  }

  void validate() const {
    (void)params();
    (void)datum();
    detail::require(grid.count >= 8, "config: grid.count must be >= 8");
    for (std::size_t k = 1; k < eps_ladder.size(); ++k)
      detail::require(eps_ladder[k] < eps_ladder[k - 1],
                      "config: eps_ladder must be strictly decreasing");
    for (double e : eps_ladder) detail::require(e > 0.0 && e <= 1.0, "config: eps out of (0, 1]");
    for (std::size_t k = 0; k < times.size(); ++k) {
      detail::require(times[k] >= 0.0, "config: times must be >= 0");
      if (k > 0) detail::require(times[k] >= times[k - 1], "config: times must be sorted");
    }
    detail::require(!times.empty(), "config: times must not be empty");
  }
};

/// Canonical experiment name for a config value or CLI subcommand alias.
inline std::string canonical_experiment(const std::string& name) {
  if (name == "attract") return "equilibrium-attraction";
  if (name == "dsmc-check") return "dsmc-crosscheck";
  for (const char* known : {"grazing-levy", "grazing-drift", "fp-longtime",
                            "equilibrium-attraction", "dsmc-crosscheck"})
    if (name == known) return name;
  throw DomainError("config: unknown experiment '" + name + "'");
}

inline ExperimentConfig default_config(const std::string& name) {
  ExperimentConfig c;
  c.experiment = canonical_experiment(name);
  if (c.experiment == "grazing-drift") {
    c.p = 0.5;
    c.datum_tag = "gaussian";
  } else if (c.experiment == "fp-longtime") {
    c.datum_tag = "gaussian";
    c.eps_ladder.clear();
    c.times = {0.0, 1.0, 2.0, 3.0, 4.0};
  } else if (c.experiment == "equilibrium-attraction") {
    c.eps_ladder = {0.2};
    c.times = {0.0, 0.5, 1.0, 2.0};
  } else if (c.experiment == "dsmc-crosscheck") {
    c.eps_ladder = {0.4};
  }
  return c;
}

/// Overlays the keys present in `j` onto the defaults of its experiment.
inline ExperimentConfig config_from_json(const nlohmann::json& j,
                                         const std::string& fallback_experiment = "") {
  const std::string name = j.contains("experiment") ? j.at("experiment").get<std::string>()
                                                     : fallback_experiment;
  ExperimentConfig c = default_config(name);
  auto take = [&](const nlohmann::json& obj, const char* key, auto& field) {
    if (obj.contains(key)) obj.at(key).get_to(field);
  };
  take(j, "p", c.p);
  take(j, "alpha", c.alpha);
  take(j, "eps_ladder", c.eps_ladder);
  take(j, "times", c.times);
  take(j, "seed", c.seed);
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    take(g, "xi_min", c.grid.xi_min);
    take(g, "xi_max", c.grid.xi_max);
    take(g, "count", c.grid.count);
  }
  if (j.contains("wild")) {
    const auto& w = j.at("wild");
    take(w, "terms", c.wild.terms_per_step);
    take(w, "max_sigma_dt", c.wild.max_sigma_dt);
    take(w, "tail_tol", c.wild.tail_tol);
  }
  if (j.contains("dsmc")) {
    const auto& d = j.at("dsmc");
    take(d, "n_particles", c.dsmc.n_particles);
    take(d, "n_seeds", c.dsmc.n_seeds);
    take(d, "dt", c.dsmc.dt);
  }
  if (j.contains("datum")) {
    const auto& d = j.at("datum");
    take(d, "tag", c.datum_tag);
    if (d.contains("params")) c.datum_params = d.at("params");
  }
  c.validate();
  return c;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  return {{"experiment", c.experiment},
          {"p", c.p},
          {"alpha", c.alpha},
          {"eps_ladder", c.eps_ladder},
          {"times", c.times},
          {"seed", c.seed},
          {"grid", {{"xi_min", c.grid.xi_min}, {"xi_max", c.grid.xi_max}, {"count", c.grid.count}}},
          {"wild",
           {{"terms", c.wild.terms_per_step},
            {"max_sigma_dt", c.wild.max_sigma_dt},
            {"tail_tol", c.wild.tail_tol}}},
          {"dsmc",
           {{"n_particles", c.dsmc.n_particles},
            {"n_seeds", c.dsmc.n_seeds},
            {"dt", c.dsmc.dt}}},
          {"datum", {{"tag", c.datum_tag}, {"params", c.datum_params}}}};
}

// ---------------------------------------------------------------------------
// Results

struct ResultRow {
  std::string experiment;
  double eps = std::numeric_limits<double>::quiet_NaN();
  double t = 0.0;
  double xi_max_arg = 0.0;
  double metric_value = 0.0;
  double exponent = 0.0;
  std::string extra;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<ResultRow> rows;
  std::vector<std::string> failures;

  bool passed() const noexcept { return failures.empty(); }
};

inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_csv(std::ostream& os, const ExperimentResult& r) {
  os << "experiment,eps,t,xi_max_arg,metric_value,exponent,extra\n";
  for (const auto& row : r.rows)
    os << row.experiment << ',' << format_number(row.eps) << ',' << format_number(row.t) << ','
       << format_number(row.xi_max_arg) << ',' << format_number(row.metric_value) << ','
       << format_number(row.exponent) << ',' << row.extra << '\n';
}

// ---------------------------------------------------------------------------
// Hypothesis gates

/// Holder exponent tested for the derivative condition: min(1/2, 2p/(p+1)).
inline double holder_delta(const ModelParams& params) {
  return std::min(0.5, 2.0 * params.p() / (params.p() + 1.0));
}

/// Exponent q + delta' of the attraction metric, delta' = min(delta, 2p/(p+1)) / 2.
inline double attraction_exponent(const ModelParams& params) {
  const double d = std::min(holder_delta(params), 2.0 * params.p() / (params.p() + 1.0));
  return params.q() + 0.5 * d;
}

inline constexpr double kHolderGateLimit = 1e3;

/// Small-xi limit of the datum must exist and equal the configured alpha within 1%.
inline void check_condition_a(const InitialDatum& d, const ModelParams& params) {
  AlphaEstimate est;
  try {
    est = alpha_limit(datum_evaluator(d, params), params);
  } catch (const ConvergenceError& e) {
    throw PreconditionGateError(std::string("condition A violated: ") + e.what());
  }
  if (std::abs(est.value - params.alpha()) > 0.01 * params.alpha())
    throw PreconditionGateError("condition A violated: small-xi limit " +
                                std::to_string(est.value) + " differs from alpha " +
                                std::to_string(params.alpha()));
}

inline void check_condition_b(const InitialDatum& d, const ModelParams& params, double R) {
  const auto h = holder_modulus(d, params, holder_delta(params), R);
  if (!std::isfinite(h.modulus) || h.modulus > kHolderGateLimit)
    throw PreconditionGateError("condition B violated: Holder modulus " +
                                std::to_string(h.modulus) + " at xi = " + std::to_string(h.xi));
}

inline void check_finite_energy(const InitialDatum& d, const ModelParams& params,
                                const XiGrid& grid, bool unit_energy) {
  if (!d.finite_energy())
    throw PreconditionGateError("finite-energy datum required, got " + d.tag());
  if (!unit_energy) return;
  const double e = energy_and_moments(sample_spectral(d, params, grid), 2.0);
  if (std::abs(e - 1.0) > 1e-3)
    throw PreconditionGateError("datum energy " + std::to_string(e) + " is not 1");
}

// ---------------------------------------------------------------------------
// Runs

namespace detail {

inline void require_decreasing(ExperimentResult& r, const std::vector<double>& xs,
                               const std::vector<double>& values, const std::string& what) {
  for (std::size_t k = 1; k < values.size(); ++k)
    if (!(values[k] < values[k - 1]))
      r.failures.push_back(what + " not strictly decreasing: " + format_number(values[k - 1]) +
                           " at " + format_number(xs[k - 1]) + " then " +
                           format_number(values[k]) + " at " + format_number(xs[k]));
}

// Grid-max weighted distance between the kinetic flow and a reference flow, per eps.
template <class Reference>
std::vector<double> ladder_distance(const ExperimentConfig& cfg, const Reference& reference,
                                    double exponent, ExperimentResult& r) {
  const auto params = cfg.params();
  const auto grid = cfg.make_grid();
  const auto d = cfg.datum();
  const auto f0 = sample_spectral(d, params, grid);
  WildConfig wild = cfg.wild;
  wild.threads = cfg.threads;
  std::vector<double> sups;
  for (double eps : cfg.eps_ladder) {
    const WildSolver solver(grid, make_kernel(eps), params, wild);
    const auto snaps = solver.evolve_through(f0, cfg.times);
    ResultRow best{r.experiment, eps, 0.0, 0.0, -1.0, exponent, "sup"};
    for (std::size_t k = 0; k < cfg.times.size(); ++k) {
      const double t = cfg.times[k];
      const auto ref = tabulate(grid, reference(t), f0.small_xi_exponent());
      const auto m = fourier_metric_point(snaps[k], ref, exponent);
      r.rows.push_back({r.experiment, eps, t, m.xi, m.value, exponent, ""});
      if (m.value > best.metric_value) {
        best.t = t;
        best.xi_max_arg = m.xi;
        best.metric_value = m.value;
      }
    }
    r.rows.push_back(best);
    sups.push_back(best.metric_value);
  }
  return sups;
}

}  // namespace detail

/// Kinetic flow vs the fractional Fokker-Planck flow in the xi^q-weighted metric.
inline ExperimentResult run_grazing_levy(const ExperimentConfig& cfg) {
  const auto params = cfg.params();
  const auto d = cfg.datum();
  check_condition_a(d, params);
  check_condition_b(d, params, cfg.grid.xi_max);
  ExperimentResult r{"grazing-levy", {}, {}};
  const auto f0 = datum_evaluator(d, params);
  const auto sups = detail::ladder_distance(
      cfg, [&](double t) { return fp_flow(f0, params, t); }, params.q(), r);
  detail::require_decreasing(r, cfg.eps_ladder, sups, "D(eps)");
  return r;
}

/// Kinetic flow of unit-energy data vs the drift flow in the xi^2-weighted metric.
inline ExperimentResult run_grazing_drift(const ExperimentConfig& cfg) {
  const auto params = cfg.params();
  const auto d = cfg.datum();
  check_finite_energy(d, params, cfg.make_grid(), true);
  ExperimentResult r{"grazing-drift", {}, {}};
  const auto f0 = datum_evaluator(d, params);
  const auto sups = detail::ladder_distance(
      cfg, [&](double t) { return drift_flow(f0, params, t); }, 2.0, r);
  detail::require_decreasing(r, cfg.eps_ladder, sups, "D(eps)");
  return r;
}

inline constexpr double kL1Window = 200.0;
inline constexpr std::size_t kL1Points = 4001;

/// Decay of the Fokker-Planck flow of finite-energy data towards M_p: the q-weighted
/// distance r(t), r(t) e^{2t}, and the L1 distance of the densities.
inline ExperimentResult run_fp_longtime(const ExperimentConfig& cfg) {
  const auto params = cfg.params();
  const auto d = cfg.datum();
  const auto grid = cfg.make_grid();
  check_finite_energy(d, params, grid, false);
  ExperimentResult r{"fp-longtime", {}, {}};
  const auto f0 = datum_evaluator(d, params);
  const Evaluator mp = [params](double xi) { return mp_hat(params, xi); };
  const auto target = tabulate(grid, mp, params.q());
  std::vector<double> late_t, scaled, l1s;
  for (double t : cfg.times) {
    const auto flow = fp_flow(f0, params, t);
    const auto m = fourier_metric_point(tabulate(grid, flow, params.q()), target, params.q());
    const double s = m.value * std::exp(2.0 * t);
    const double l1 = l1_distance(flow, mp, kL1Window, kL1Points);
    r.rows.push_back({r.experiment, std::numeric_limits<double>::quiet_NaN(), t, m.xi, m.value,
                      params.q(), "scaled=" + format_number(s) + ";l1=" + format_number(l1)});
    if (t >= 1.0) {
      late_t.push_back(t);
      scaled.push_back(s);
    }
    l1s.push_back(l1);
  }
  if (!scaled.empty()) {
    const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
    if (!(*hi < 1.5 * *lo))
      r.failures.push_back("r(t) e^{2t} varies by a factor " + format_number(*hi / *lo) +
                           " over t >= 1");
  }
  detail::require_decreasing(r, cfg.times, l1s, "l1(t)");
  return r;
}

/// Weighted distance of the kinetic flow to M_p at fixed eps, exponent q + delta'.
inline ExperimentResult run_equilibrium_attraction(const ExperimentConfig& cfg) {
  const auto params = cfg.params();
  const auto d = cfg.datum();
  const auto grid = cfg.make_grid();
  detail::require(!cfg.eps_ladder.empty(), "equilibrium-attraction: eps_ladder is empty");
  check_condition_a(d, params);
  check_condition_b(d, params, cfg.grid.xi_max);
  ExperimentResult r{"equilibrium-attraction", {}, {}};
  const double eps = cfg.eps_ladder.front();
  const double s = attraction_exponent(params);
  WildConfig wild = cfg.wild;
  wild.threads = cfg.threads;
  const WildSolver solver(grid, make_kernel(eps), params, wild);
  const auto snaps = solver.evolve_through(sample_spectral(d, params, grid), cfg.times);
  const auto target = tabulate(grid, [&](double xi) { return mp_hat(params, xi); }, params.q());
  std::vector<double> values;
  for (std::size_t k = 0; k < cfg.times.size(); ++k) {
    const auto m = fourier_metric_point(snaps[k], target, s);
    r.rows.push_back({r.experiment, eps, cfg.times[k], m.xi, m.value, s, ""});
    values.push_back(m.value);
  }
  detail::require_decreasing(r, cfg.times, values, "distance to M_p");
  return r;
}

/// Particle simulation against the spectral solver and against e^{-L t}. The
/// characteristic function of the configured datum is averaged over seeds and compared on
/// xi in [0.1, 10]; the energy ratio E(t)/E(0) uses separate unit Gaussian ensembles.
inline ExperimentResult run_dsmc_crosscheck(const ExperimentConfig& cfg) {
  const auto params = cfg.params();
  const auto d = cfg.datum();
  const auto grid = cfg.make_grid();
  detail::require(!cfg.eps_ladder.empty(), "dsmc-crosscheck: eps_ladder is empty");
  detail::require(cfg.dsmc.n_seeds >= 2, "dsmc-crosscheck: need at least two seeds");
  const double eps = cfg.eps_ladder.front();
  const auto k = make_kernel(eps);
  const double rate = energy_loss_rate(k, params);
  const std::size_t n = cfg.dsmc.n_particles;
  const std::size_t seeds = cfg.dsmc.n_seeds;
  const std::size_t nt = cfg.times.size();

  WildConfig wild = cfg.wild;
  wild.threads = cfg.threads;
  const auto spectral =
      WildSolver(grid, k, params, wild).evolve_through(sample_spectral(d, params, grid), cfg.times);
  std::vector<std::size_t> window;
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (grid[j] >= 0.1 && grid[j] <= 10.0) window.push_back(j);

  // chf[seed][time][window node], ratio[seed][time]
  std::vector<std::vector<std::vector<double>>> chf(
      seeds, std::vector<std::vector<double>>(nt, std::vector<double>(window.size())));
  std::vector<std::vector<double>> ratio(seeds, std::vector<double>(nt));
  detail::parallel_tasks(seeds, cfg.threads, [&](std::size_t s) {
    auto e = sample_initial(d, params, n, cfg.seed, 2 * s);
    auto g = sample_initial(InitialDatum::gaussian(), params, n, cfg.seed, 2 * s + 1);
    const double e0 = mean_energy(g);
    for (std::size_t ti = 0; ti < nt; ++ti) {
      advance_to(e, k, params, cfg.times[ti], cfg.dsmc.dt);
      advance_to(g, k, params, cfg.times[ti], cfg.dsmc.dt);
      for (std::size_t w = 0; w < window.size(); ++w)
        chf[s][ti][w] = empirical_chf_at(e, grid[window[w]]);
      ratio[s][ti] = mean_energy(g) / e0;
    }
  });

  ExperimentResult r{"dsmc-crosscheck", {}, {}};
  const double envelope = 5.0 / std::sqrt(static_cast<double>(n));
  const auto ns = static_cast<double>(seeds);
  for (std::size_t ti = 0; ti < nt; ++ti) {
    const double t = cfg.times[ti];
    MetricPoint pooled;
    double single = 0.0;
    for (std::size_t w = 0; w < window.size(); ++w) {
      const double ref = spectral[ti][window[w]];
      double mean = 0.0;
      for (std::size_t s = 0; s < seeds; ++s) {
        mean += chf[s][ti][w];
        single = std::max(single, std::abs(chf[s][ti][w] - ref));
      }
      const double dev = std::abs(mean / ns - ref);
      if (dev > pooled.value) pooled = {dev, grid[window[w]]};
    }
    double mean = 0.0;
    for (std::size_t s = 0; s < seeds; ++s) mean += ratio[s][ti];
    mean /= ns;
    double var = 0.0;
    for (std::size_t s = 0; s < seeds; ++s) var += (ratio[s][ti] - mean) * (ratio[s][ti] - mean);
    const double se = std::sqrt(var / (ns - 1.0) / ns);
    const double expected = std::exp(-rate * t);
    r.rows.push_back({r.experiment, eps, t, pooled.xi, pooled.value, 0.0,
                      "envelope=" + format_number(envelope) + ";worst_single_seed=" +
                          format_number(single) + ";energy_ratio=" + format_number(mean) +
                          ";expected=" + format_number(expected) + ";se=" + format_number(se)});
    if (pooled.value > envelope)
      r.failures.push_back("characteristic function deviation " + format_number(pooled.value) +
                           " exceeds 5/sqrt(N) at t = " + format_number(t));
    if (std::abs(mean - expected) > 3.0 * se + 1e-14)
      r.failures.push_back("mean energy ratio " + format_number(mean) + " is more than 3 SE from " +
                           format_number(expected) + " at t = " + format_number(t));
  }
  return r;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto name = canonical_experiment(cfg.experiment);
  if (name == "grazing-levy") return run_grazing_levy(cfg);
  if (name == "grazing-drift") return run_grazing_drift(cfg);
  if (name == "fp-longtime") return run_fp_longtime(cfg);
  if (name == "equilibrium-attraction") return run_equilibrium_attraction(cfg);
  return run_dsmc_crosscheck(cfg);
}

}  // namespace kacgraze
