#pragma once

// Distances and diagnostics: weighted Fourier metrics, the small-xi limit and Holder
// modulus behind the convergence hypotheses, moments, and an L1 distance in velocity.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "kacgraze/dsmc.hpp"
#include "kacgraze/error.hpp"
#include "kacgraze/model.hpp"
#include "kacgraze/quadrature.hpp"

namespace kacgraze {

struct MetricPoint {
  double value = 0.0;
  double xi = 0.0;  // node attaining the maximum
};

/// max over nodes of |f - g| / xi^s, with the maximizing node.
inline MetricPoint fourier_metric_point(const SpectralDensity& f, const SpectralDensity& g,
                                        double s) {
  detail::require(f.grid() == g.grid(), "fourier_metric: arguments on different grids");
  detail::require(s > 0.0, "fourier_metric: exponent must be > 0");
  MetricPoint best{0.0, f.grid()[0]};
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double xi = f.grid()[j];
    const double d = std::abs(f[j] - g[j]) / std::pow(xi, s);
    if (d > best.value) best = {d, xi};
  }
  return best;
}

inline double fourier_metric(const SpectralDensity& f, const SpectralDensity& g, double s) {
  return fourier_metric_point(f, g, s).value;
}

struct MetricRow {
  double t = 0.0;
  double value = 0.0;
  double xi = 0.0;
};

struct MetricReport {
  double exponent = 0.0;
  std::vector<MetricRow> rows;
  std::string metadata;

  void add(double t, const MetricPoint& m) { rows.push_back({t, m.value, m.xi}); }

  MetricRow sup() const {
    MetricRow best;
    for (const auto& r : rows)
      if (r.value >= best.value) best = r;
    return best;
  }
};

// ---------------------------------------------------------------------------
// Condition A: lim (1 - f(xi)) / xi^q as xi -> 0.

struct AlphaEstimate {
  double value = 0.0;
  // |e(1e-4) - e(1e-3)| / max |e|; below 0.1 means the sequence is Cauchy.
  double cauchy_gap = 0.0;
  std::array<double, 3> samples{};
};

/// Aitken-accelerated limit of (1 - f(xi)) / xi^q from xi = 1e-2, 1e-3, 1e-4.
/// Throws ConvergenceError when the three estimates are not Cauchy within 10%.
inline AlphaEstimate alpha_limit(const Evaluator& f, const ModelParams& params) {
  constexpr std::array<double, 3> kXi = {1e-2, 1e-3, 1e-4};
  AlphaEstimate out;
  double scale = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    out.samples[k] = (1.0 - f(kXi[k])) / std::pow(kXi[k], params.q());
    if (!std::isfinite(out.samples[k])) throw ConvergenceError("alpha_limit: non-finite sample");
    scale = std::max(scale, std::abs(out.samples[k]));
  }
  const auto& e = out.samples;
  out.cauchy_gap = scale > 0.0 ? std::abs(e[2] - e[1]) / scale : 0.0;
  if (out.cauchy_gap > 0.1)
    throw ConvergenceError("alpha_limit: estimates " + std::to_string(e[0]) + ", " +
                           std::to_string(e[1]) + ", " + std::to_string(e[2]) +
                           " are not Cauchy within 10%");
  const double d1 = e[1] - e[0];
  const double d2 = e[2] - e[1];
  const double curvature = d2 - d1;
  out.value = e[2];
  // Aitken only when the differences contract geometrically in the same direction.
  if (curvature != 0.0 && d1 * d2 > 0.0 && std::abs(d2) < std::abs(d1))
    out.value = e[2] - d2 * d2 / curvature;
  return out;
}

// ---------------------------------------------------------------------------
// Condition B: Holder continuity of F0(xi) = f0'(xi) / xi^{(1-p)/(1+p)} on (0, R].

struct HolderDiagnostic {
  double delta = 0.0;
  double R = 0.0;
  double modulus = 0.0;
  double xi = 0.0;  // maximizing pair
  double tau = 0.0;
  std::size_t pairs = 0;
};

/// Scans all pairs of a stratified node set in (0, R]: `count` geometric nodes down to
/// R * 1e-6, `count` uniform nodes, and a near-diagonal partner for each.
inline HolderDiagnostic holder_modulus(const InitialDatum& d, const ModelParams& params,
                                       double delta, double R, std::size_t count = 200) {
  detail::require(delta > 0.0 && delta < 1.0, "holder_modulus: delta must lie in (0, 1)");
  detail::require(R > 0.0, "holder_modulus: R must be > 0");
  std::vector<double> xs;
  for (std::size_t k = 0; k < count; ++k) {
    const double u = count > 1 ? static_cast<double>(k) / static_cast<double>(count - 1) : 1.0;
    xs.push_back(R * std::pow(1e-6, 1.0 - u));
    xs.push_back(R * (static_cast<double>(k) + 1.0) / static_cast<double>(count));
  }
  const std::size_t base = xs.size();
  for (std::size_t k = 0; k < base; ++k) xs.push_back(xs[k] * (1.0 - 1e-3));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  const double expo = params.derivative_exponent();
  std::vector<double> F(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k)
    F[k] = initial_datum_hat_derivative(d, params, xs[k]) / std::pow(xs[k], expo);

  HolderDiagnostic h{delta, R, 0.0, 0.0, 0.0, 0};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      const double ratio = std::abs(F[i] - F[j]) / std::pow(xs[j] - xs[i], delta);
      ++h.pairs;
      if (ratio > h.modulus) {
        h.modulus = ratio;
        h.xi = xs[i];
        h.tau = xs[j];
      }
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Moments

/// Sample mean of |v|^order.
inline double energy_and_moments(const ParticleEnsemble& e, double order) {
  detail::require(order >= 0.0, "energy_and_moments: order must be >= 0");
  double acc = 0.0;
  for (double v : e.velocities) acc += std::pow(std::abs(v), order);
  return acc / static_cast<double>(e.size());
}

/// -f''(0) from the three smallest nodes and the even extension: the second differences
/// 2 (1 - f(xi)) / xi^2 are fitted by a least-squares line in xi^2 and evaluated at 0.
/// Only defined for data with a finite second moment.
inline double energy_and_moments(const SpectralDensity& f, double order) {
  if (order != 2.0)
    throw DomainError("energy_and_moments: spectral data supports order 2 only");
  if (f.small_xi_exponent() != 2.0)
    throw DomainError("energy_and_moments: data is not declared finite-energy");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double x = f.grid()[k] * f.grid()[k];
    const double y = 2.0 * (1.0 - f[k]) / x;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);
  return (sy - slope * sx) / 3.0;
}

// ---------------------------------------------------------------------------
// L1 distance in velocity space

struct L1Options {
  std::size_t panel_nodes = 16;
  // |f - g| below this on [X, 2X] ends the transform range.
  double decay_tol = 1e-13;
  double xi_limit = 1e4;
};

/// Inverts both transforms on a uniform grid of `v_count` points over [-V, V] and
/// integrates |f - g| by the trapezoid rule. Mass outside the window is not counted.
inline double l1_distance(const Evaluator& fhat, const Evaluator& ghat, double v_window,
                          std::size_t v_count, const L1Options& opt = {}) {
  detail::require(v_window > 0.0 && v_count >= 3, "l1_distance: invalid velocity window");
  auto diff = [&](double xi) { return fhat(xi) - ghat(xi); };

  double cut = 1.0;
  for (;;) {
    double worst = 0.0;
    for (int k = 0; k <= 32; ++k) worst = std::max(worst, std::abs(diff(cut * (1.0 + k / 32.0))));
    if (worst < opt.decay_tol) break;
    cut *= 2.0;
    if (cut > opt.xi_limit)
      throw ConvergenceError("l1_distance: transforms do not decay within xi_limit");
  }

  const double width = std::min(1.0, std::numbers::pi / v_window);
  const auto panels = static_cast<std::size_t>(std::ceil(cut / width));
  const auto unit = gauss_legendre(opt.panel_nodes, 0.0, width);
  std::vector<double> nodes;
  std::vector<double> wd;
  nodes.reserve(panels * unit.size());
  wd.reserve(panels * unit.size());
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = static_cast<double>(p) * width;
    for (std::size_t k = 0; k < unit.size(); ++k) {
      nodes.push_back(lo + unit.nodes[k]);
      wd.push_back(unit.weights[k] * diff(lo + unit.nodes[k]));
    }
  }

  const std::size_t half = (v_count - 1) / 2;
  const double dv = v_window / static_cast<double>(std::max<std::size_t>(half, 1));
  double total = 0.0;
  for (std::size_t i = 0; i <= half; ++i) {
    const double v = dv * static_cast<double>(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) acc += wd[k] * std::cos(v * nodes[k]);
    const double density = std::abs(acc) / std::numbers::pi;
    const double w = (i == 0) ? 1.0 : (i == half ? 1.0 : 2.0);
    total += w * density;
  }
  return total * dv;
}

}  // namespace kacgraze
