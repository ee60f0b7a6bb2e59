#pragma once

// N-particle Kac process with the inelastic collision rule. Collision events arrive as a
// Poisson process of rate N sigma / 2; each event picks an unordered pair uniformly.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "kacgraze/error.hpp"
#include "kacgraze/kernel.hpp"
#include "kacgraze/model.hpp"
#include "kacgraze/parallel.hpp"

namespace kacgraze {

using Rng = std::mt19937_64;

/// Seeds an engine from a base seed and a stream index.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

struct ParticleEnsemble {
  std::vector<double> velocities;
  Rng rng;
  double time = 0.0;

  std::size_t size() const noexcept { return velocities.size(); }
};

/// v* = v cos|cos|^p - w sin|sin|^p,  w* = v sin|sin|^p + w cos|cos|^p.
inline std::pair<double, double> collide_pair(double v, double w, double theta,
                                              const ModelParams& params) {
  const double p = params.p();
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double cp = c * std::pow(std::abs(c), p);
  const double sp = s * std::pow(std::abs(s), p);
  return {v * cp - w * sp, v * sp + w * cp};
}

/// |sin|^{2+2p} + |cos|^{2+2p}, the energy retained by a collision at angle theta.
inline double energy_factor(double theta, const ModelParams& params) {
  const double e = 2.0 + 2.0 * params.p();
  return std::pow(std::abs(std::sin(theta)), e) + std::pow(std::abs(std::cos(theta)), e);
}

struct StepOptions {
  // Upper bound on events per step; 0 means 8 events per particle.
  std::size_t event_cap = 0;
};

/// Advances the ensemble by dt, drawing angles from `theta_sampler(rng)`.
template <class ThetaSampler>
  requires std::invocable<ThetaSampler&, Rng&>
void step(ParticleEnsemble& e, const GrazingKernel& k, const ModelParams& params, double dt,
          ThetaSampler&& theta_sampler, const StepOptions& opt = {}) {
  detail::require(dt > 0.0, "dsmc step: dt must be > 0");
  const std::size_t n = e.size();
  detail::require(n >= 2, "dsmc step: need at least two particles");
  const double mean_events = 0.5 * static_cast<double>(n) * k.sigma() * dt;
  std::poisson_distribution<std::uint64_t> events_dist(mean_events);
  const std::uint64_t events = events_dist(e.rng);
  const std::size_t cap = opt.event_cap ? opt.event_cap : 8 * n;
  if (events > cap)
    throw DomainError("dsmc step: " + std::to_string(events) +
                      " events exceed the cap; reduce dt");

  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::uniform_int_distribution<std::size_t> second(0, n - 2);
  auto& v = e.velocities;
  for (std::uint64_t ev = 0; ev < events; ++ev) {
    const std::size_t i = first(e.rng);
    std::size_t j = second(e.rng);
    if (j >= i) ++j;
    const double theta = theta_sampler(e.rng);
    const auto [vi, vj] = collide_pair(v[i], v[j], theta, params);
#ifndef NDEBUG
    const double before = (v[i] * v[i] + v[j] * v[j]) * energy_factor(theta, params);
    const double after = vi * vi + vj * vj;
    if (std::abs(after - before) > 1e-12 * std::max(before, 1e-300))
      throw Error("dsmc step: collision violated the energy identity");
#endif
    v[i] = vi;
    v[j] = vj;
  }
  e.time += dt;
}

inline void step(ParticleEnsemble& e, const GrazingKernel& k, const ModelParams& params,
                 double dt, const StepOptions& opt = {}) {
  step(e, k, params, dt, [&k](Rng& rng) { return sample_theta(k, rng); }, opt);
}

/// Advances to time t in steps of at most dt_max.
inline void advance_to(ParticleEnsemble& e, const GrazingKernel& k, const ModelParams& params,
                       double t, double dt_max, const StepOptions& opt = {}) {
  detail::require(dt_max > 0.0, "advance_to: dt_max must be > 0");
  while (t - e.time > 1e-12 * std::max(1.0, t))
    step(e, k, params, std::min(dt_max, t - e.time), opt);
}

/// Symmetric stable variate with characteristic function exp(-scale |xi|^q), q in (0, 2],
/// by the Chambers-Mallows-Stuck transform.
template <class Engine>
double sample_symmetric_stable(double q, double scale, Engine& rng) {
  detail::require(q > 0.0 && q <= 2.0, "sample_symmetric_stable: q must lie in (0, 2]");
  std::uniform_real_distribution<double> angle(-0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
  std::exponential_distribution<double> expo(1.0);
  double u = angle(rng);
  while (std::abs(u) >= 0.5 * std::numbers::pi) u = angle(rng);
  const double w = expo(rng);
  double x;
  if (q == 1.0) {
    x = std::tan(u);
  } else {
    x = std::sin(q * u) / std::pow(std::cos(u), 1.0 / q) *
        std::pow(std::cos((1.0 - q) * u) / w, (1.0 - q) / q);
  }
  return std::pow(scale, 1.0 / q) * x;
}

template <class Engine>
double sample_datum(const InitialDatum& d, const ModelParams& params, Engine& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double q = params.q();
  const double a = params.alpha();
  switch (d.kind()) {
    case InitialDatum::Kind::Equilibrium:
      return sample_symmetric_stable(q, d.equilibrium_alpha(params), rng);
    case InitialDatum::Kind::Mixture: {
      std::bernoulli_distribution pick(0.5);
      return pick(rng) ? sample_symmetric_stable(q, 2.0 * a, rng) : normal(rng);
    }
    case InitialDatum::Kind::Convolution: {
      const double s = sample_symmetric_stable(q, a, rng);
      return s + normal(rng);
    }
    case InitialDatum::Kind::Gaussian:
      return d.scale() * normal(rng);
  }
  throw DomainError("sample_initial: datum has no sampler");
}

inline ParticleEnsemble sample_initial(const InitialDatum& d, const ModelParams& params,
                                       std::size_t n, std::uint64_t seed,
                                       std::uint64_t stream = 0) {
  detail::require(n >= 2, "sample_initial: need at least two particles");
  if (!d.has_sampler()) throw DomainError("sample_initial: datum has no sampler");
  ParticleEnsemble e{std::vector<double>(n), make_rng(seed, stream), 0.0};
  for (auto& v : e.velocities) v = sample_datum(d, params, e.rng);
  return e;
}

/// (1/N) sum_i cos(xi v_i).
inline double empirical_chf_at(const ParticleEnsemble& e, double xi) {
  double acc = 0.0;
  for (double x : e.velocities) acc += std::cos(xi * x);
  return acc / static_cast<double>(e.size());
}

/// (1/N) sum_i cos(xi_j v_i) at every grid node. A finite sample always has a
/// smooth transform at the origin, so the small-xi exponent defaults to 2.
inline SpectralDensity empirical_chf(const ParticleEnsemble& e, const XiGrid& grid,
                                     double small_xi_exponent = 2.0, unsigned threads = 1) {
  detail::require(e.size() >= 1, "empirical_chf: empty ensemble");
  std::vector<double> out(grid.size());
  detail::parallel_for(grid.size(), threads, [&](std::size_t b, std::size_t end) {
    for (std::size_t j = b; j < end; ++j) out[j] = empirical_chf_at(e, grid[j]);
  });
  return {grid, std::move(out), small_xi_exponent};
}

/// Sample mean of v^2.
inline double mean_energy(const ParticleEnsemble& e) {
  double acc = 0.0;
  for (double x : e.velocities) acc += x * x;
  return acc / static_cast<double>(e.size());
}

}  // namespace kacgraze
