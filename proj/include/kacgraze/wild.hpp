#pragma once

// Time evolution of even characteristic functions under the inelastic Kac equation
//
//   d/dt f(xi) = 2 int_0^{pi/2} b(theta) [ f(xi cos^{p+1}) f(xi sin^{p+1}) - f(xi) ] dtheta
//
// via the Wild series, restarted every dt so that sigma dt stays bounded. A classical RK4
// integrator of the same equation serves as an independent cross-check.

#include <cmath>
#include <numbers>
#include <vector>

#include "kacgraze/error.hpp"
#include "kacgraze/kernel.hpp"
#include "kacgraze/model.hpp"
#include "kacgraze/parallel.hpp"

namespace kacgraze {

struct WildConfig {
  int terms_per_step = 20;
  double max_sigma_dt = std::numbers::ln2;
  double tail_tol = 1e-6;
  unsigned threads = 1;
};

/// Evaluation recipes for every (grid node, quadrature node) pair of a kernel, so the
/// gain operator reduces to weighted sums of interpolated values.
class CollisionTable {
public:
  CollisionTable(const XiGrid& grid, const GrazingKernel& k, const ModelParams& params)
      : grid_(grid), nodes_(k.quadrature().size()) {
    const auto& rule = k.quadrature();
    const double e = params.p() + 1.0;
    double total = 0.0;
    weights_.resize(nodes_);
    for (std::size_t m = 0; m < nodes_; ++m) {
      weights_[m] = rule.weights[m] * k(rule.nodes[m]);
      total += weights_[m];
    }
    // 2 * sum(weights) == 1, so constants are fixed points of the gain operator.
    for (auto& w : weights_) w /= 2.0 * total;
    cos_.resize(grid.size() * nodes_);
    sin_.resize(grid.size() * nodes_);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t m = 0; m < nodes_; ++m) {
        const double th = rule.nodes[m];
        cos_[i * nodes_ + m] = make_stencil(grid, grid[i] * std::pow(std::cos(th), e));
        sin_[i * nodes_ + m] = make_stencil(grid, grid[i] * std::pow(std::sin(th), e));
      }
    }
  }

  const XiGrid& grid() const noexcept { return grid_; }
  std::size_t quadrature_nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }

  // f evaluated at xi_i cos^{p+1}(theta_m) and xi_i sin^{p+1}(theta_m), row-major [i][m].
  struct Lookup {
    std::vector<double> at_cos;
    std::vector<double> at_sin;
  };

  Lookup lookup(const SpectralDensity& f, unsigned threads = 1) const {
    detail::require(f.grid() == grid_, "CollisionTable: density lives on a different grid");
    Lookup out{std::vector<double>(cos_.size()), std::vector<double>(sin_.size())};
    detail::parallel_for(grid_.size(), threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t idx = b * nodes_; idx < e * nodes_; ++idx) {
        out.at_cos[idx] = f.apply(cos_[idx]);
        out.at_sin[idx] = f.apply(sin_[idx]);
      }
    });
    return out;
  }

private:
  XiGrid grid_;
  std::size_t nodes_;
  std::vector<double> weights_;
  std::vector<InterpStencil> cos_;
  std::vector<InterpStencil> sin_;
};

/// Symmetrized gain operator
///   Q+(phi, psi)(xi) = (1/sigma) int_0^{pi/2} b [phi(xi c) psi(xi s) + psi(xi c) phi(xi s)]
/// with c = cos^{p+1} theta, s = sin^{p+1} theta.
inline SpectralDensity qplus(const SpectralDensity& phi, const SpectralDensity& psi,
                             const CollisionTable& table, unsigned threads = 1) {
  detail::require(phi.grid() == psi.grid(), "qplus: arguments on different grids");
  const auto a = table.lookup(phi, threads);
  const auto b = table.lookup(psi, threads);
  const std::size_t m_count = table.quadrature_nodes();
  const auto w = table.weights();
  std::vector<double> out(phi.size());
  detail::parallel_for(out.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double acc = 0.0;
      for (std::size_t m = 0; m < m_count; ++m) {
        const std::size_t idx = i * m_count + m;
        acc += w[m] * (a.at_cos[idx] * b.at_sin[idx] + b.at_cos[idx] * a.at_sin[idx]);
      }
      out[i] = acc;
    }
  });
  return {phi.grid(), std::move(out), phi.small_xi_exponent()};
}

inline SpectralDensity qplus(const SpectralDensity& phi, const SpectralDensity& psi,
                             const GrazingKernel& k, const ModelParams& params) {
  return qplus(phi, psi, CollisionTable(phi.grid(), k, params));
}

/// Restarted Wild-series integrator for one kernel and grid.
class WildSolver {
public:
  WildSolver(const XiGrid& grid, const GrazingKernel& k, const ModelParams& params,
             WildConfig cfg = {})
      : table_(grid, k, params), sigma_(k.sigma()), cfg_(cfg) {
    detail::require(cfg.terms_per_step >= 1, "WildConfig: terms_per_step must be >= 1");
    detail::require(cfg.max_sigma_dt > 0.0, "WildConfig: max_sigma_dt must be > 0");
    detail::require(cfg.tail_tol > 0.0, "WildConfig: tail_tol must be > 0");
  }

  double sigma() const noexcept { return sigma_; }
  const WildConfig& config() const noexcept { return cfg_; }
  const CollisionTable& table() const noexcept { return table_; }

  /// Certified bound on the weight of the discarded Wild terms for a step dt.
  double tail_bound(double dt) const {
    return std::pow(-std::expm1(-sigma_ * dt), cfg_.terms_per_step + 1);
  }

  /// One step of length dt: e^{-sigma dt} sum_n phi_n (1 - e^{-sigma dt})^n truncated at
  /// n = N, with the weight of the discarded tail assigned to phi_N so that total mass
  /// (the value at xi = 0) is conserved.
  SpectralDensity step(const SpectralDensity& f, double dt) const {
    detail::require(dt >= 0.0, "wild_step: dt must be >= 0");
    if (sigma_ * dt > cfg_.max_sigma_dt * (1.0 + 1e-12))
      throw DomainError("wild_step: sigma*dt exceeds max_sigma_dt");
    if (dt == 0.0) return f;
    const double tail = tail_bound(dt);
    if (tail > cfg_.tail_tol)
      throw ToleranceError("wild_step: truncation tail " + std::to_string(tail) +
                           " exceeds tail_tol");

    const auto n_terms = static_cast<std::size_t>(cfg_.terms_per_step);
    const std::size_t g = f.size();
    const std::size_t m_count = table_.quadrature_nodes();
    const auto w = table_.weights();
    const double keep = std::exp(-sigma_ * dt);
    const double grow = -std::expm1(-sigma_ * dt);

    std::vector<CollisionTable::Lookup> looked;
    looked.reserve(n_terms);
    std::vector<double> result(g, 0.0);
    SpectralDensity phi = f;
    double weight = keep;
    for (std::size_t n = 0;; ++n) {
      const double wn = n < n_terms ? weight : std::pow(grow, static_cast<double>(n_terms));
      const auto vals = phi.values();
      for (std::size_t i = 0; i < g; ++i) result[i] += wn * vals[i];
      if (n == n_terms) break;
      weight *= grow;

      looked.push_back(table_.lookup(phi, cfg_.threads));
      std::vector<double> next(g);
      const double scale = 2.0 / static_cast<double>(n + 1);
      detail::parallel_for(g, cfg_.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          double acc = 0.0;
          for (std::size_t m = 0; m < m_count; ++m) {
            const std::size_t idx = i * m_count + m;
            double conv = 0.0;
            for (std::size_t j = 0; j <= n; ++j)
              conv += looked[j].at_cos[idx] * looked[n - j].at_sin[idx];
            acc += w[m] * conv;
          }
          next[i] = scale * acc;
        }
      });
      phi = SpectralDensity(f.grid(), std::move(next), f.small_xi_exponent());
    }
    return {f.grid(), std::move(result), f.small_xi_exponent()};
  }

  /// Advances f0 by time t with steps of at most max_sigma_dt / sigma.
  SpectralDensity evolve(const SpectralDensity& f0, double t) const {
    detail::require(t >= 0.0, "evolve: t must be >= 0");
    const double dt_max = cfg_.max_sigma_dt / sigma_;
    SpectralDensity f = f0;
    double remaining = t;
    while (remaining > 1e-14 * std::max(1.0, t)) {
      const double dt = std::min(dt_max, remaining);
      f = step(f, dt);
      remaining -= dt;
    }
    return f;
  }

  /// Snapshots at the (nondecreasing) times, evolving once through all of them.
  std::vector<SpectralDensity> evolve_through(const SpectralDensity& f0,
                                              std::span<const double> times) const {
    std::vector<SpectralDensity> out;
    out.reserve(times.size());
    SpectralDensity f = f0;
    double now = 0.0;
    for (double t : times) {
      detail::require(t >= now, "evolve_through: times must be nondecreasing and >= 0");
      f = evolve(f, t - now);
      now = t;
      out.push_back(f);
    }
    return out;
  }

private:
  CollisionTable table_;
  double sigma_;
  WildConfig cfg_;
};

inline SpectralDensity wild_step(const SpectralDensity& f, const GrazingKernel& k,
                                 const ModelParams& params, double dt, const WildConfig& cfg = {}) {
  return WildSolver(f.grid(), k, params, cfg).step(f, dt);
}

inline SpectralDensity evolve(const SpectralDensity& f0, const GrazingKernel& k,
                              const ModelParams& params, double t, const WildConfig& cfg = {}) {
  return WildSolver(f0.grid(), k, params, cfg).evolve(f0, t);
}

/// Classical RK4 on the nodal values of the collision equation. Evaluates the
/// right-hand side directly through the interpolant; it shares no code with the Wild
/// recursion.
inline SpectralDensity collocation_oracle(const SpectralDensity& f0, const GrazingKernel& k,
                                          const ModelParams& params, double t, int steps) {
  detail::require(t >= 0.0, "collocation_oracle: t must be >= 0");
  detail::require(steps >= 1, "collocation_oracle: steps must be >= 1");
  const double dt = t / steps;
  if (k.sigma() * dt > 0.5)
    throw DomainError("collocation_oracle: sigma*dt > 0.5 violates the stability bound");
  if (t == 0.0) return f0;

  const XiGrid& grid = f0.grid();
  const double exponent = f0.small_xi_exponent();
  const auto& rule = k.quadrature();
  const double e = params.p() + 1.0;
  const std::size_t g = grid.size();

  auto rhs = [&](const std::vector<double>& v) {
    const SpectralDensity f(grid, v, exponent);
    std::vector<double> out(g, 0.0);
    for (std::size_t i = 0; i < g; ++i) {
      double acc = 0.0;
      for (std::size_t m = 0; m < rule.size(); ++m) {
        const double th = rule.nodes[m];
        const double gain = f(grid[i] * std::pow(std::cos(th), e)) *
                            f(grid[i] * std::pow(std::sin(th), e));
        acc += rule.weights[m] * k(th) * (gain - v[i]);
      }
      out[i] = 2.0 * acc;
    }
    return out;
  };

  std::vector<double> y(f0.values().begin(), f0.values().end());
  std::vector<double> tmp(g);
  for (int s = 0; s < steps; ++s) {
    const auto k1 = rhs(y);
    for (std::size_t i = 0; i < g; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    const auto k2 = rhs(tmp);
    for (std::size_t i = 0; i < g; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    const auto k3 = rhs(tmp);
    for (std::size_t i = 0; i < g; ++i) tmp[i] = y[i] + dt * k3[i];
    const auto k4 = rhs(tmp);
    for (std::size_t i = 0; i < g; ++i)
      y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return {grid, std::move(y), exponent};
}

}  // namespace kacgraze
