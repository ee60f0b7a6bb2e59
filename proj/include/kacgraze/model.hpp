#pragma once

// Shared model types: parameters, the positive xi-grid, sampled even characteristic
// functions with their interpolant, the Levy equilibrium and the initial-data catalog.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kacgraze/error.hpp"
#include "kacgraze/quadrature.hpp"

namespace kacgraze {

/// Inelasticity p in (0, 1] and equilibrium scale alpha > 0. The Levy index
/// q = 2/(1+p) is always derived from p.
class ModelParams {
public:
  ModelParams(double p, double alpha) : p_(p), alpha_(alpha) {
    detail::require(p > 0.0 && p <= 1.0, "ModelParams: p must lie in (0, 1]");
    detail::require(alpha > 0.0 && std::isfinite(alpha), "ModelParams: alpha must be > 0");
  }

  double p() const noexcept { return p_; }
  double alpha() const noexcept { return alpha_; }
  double q() const noexcept { return 2.0 / (1.0 + p_); }
  // Exponent (1-p)/(1+p) = q - 1 appearing in the Holder condition on the derivative.
  double derivative_exponent() const noexcept { return (1.0 - p_) / (1.0 + p_); }

  ModelParams with_alpha(double alpha) const { return {p_, alpha}; }

private:
  double p_;
  double alpha_;
};

/// Equilibrium characteristic function exp(-alpha |xi|^q).
inline double mp_hat(const ModelParams& params, double xi) {
  return std::exp(-params.alpha() * std::pow(std::abs(xi), params.q()));
}

// Geometric grid xi_min * r^j, j = 0..count-1, uniform in u = log(xi).
class XiGrid {
public:
  XiGrid(double xi_min, double xi_max, std::size_t count) : xi_min_(xi_min), count_(count) {
    detail::require(xi_min > 0.0, "XiGrid: xi_min must be > 0");
    detail::require(count >= 2, "XiGrid: need at least two nodes");
    detail::require(xi_max > xi_min, "XiGrid: xi_max must exceed xi_min");
    log_step_ = std::log(xi_max / xi_min) / static_cast<double>(count - 1);
    nodes_.resize(count);
    for (std::size_t j = 0; j < count; ++j)
      nodes_[j] = xi_min * std::exp(log_step_ * static_cast<double>(j));
    nodes_.front() = xi_min;
    nodes_.back() = xi_max;
    build_slope_stencils();
  }

  static XiGrid standard() { return {1e-4, 32.0, 256}; }

  std::size_t size() const noexcept { return count_; }
  double xi_min() const noexcept { return xi_min_; }
  double xi_max() const noexcept { return nodes_.back(); }
  double log_step() const noexcept { return log_step_; }
  double ratio() const noexcept { return std::exp(log_step_); }
  double operator[](std::size_t j) const { return nodes_[j]; }
  std::span<const double> nodes() const noexcept { return nodes_; }

  friend bool operator==(const XiGrid& a, const XiGrid& b) {
    return a.count_ == b.count_ && a.xi_min_ == b.xi_min_ && a.xi_max() == b.xi_max();
  }

  // First-derivative (in log xi) stencil for node j: {first index, weights}.
  std::pair<std::size_t, std::span<const double>> slope_stencil(std::size_t j) const {
    const std::size_t width = stencil_weights_.front().size();
    const std::size_t half = width / 2;
    const std::size_t start = std::min(j >= half ? j - half : 0, count_ - width);
    return {start, stencil_weights_[j - start]};
  }

private:
  void build_slope_stencils() {
    const std::size_t width = std::min<std::size_t>(7, count_);
    std::vector<double> offsets(width);
    for (std::size_t k = 0; k < width; ++k) offsets[k] = static_cast<double>(k);
    stencil_weights_.resize(width);
    for (std::size_t at = 0; at < width; ++at) {
      auto w = finite_difference_weights(static_cast<double>(at), offsets, 1);
      for (auto& x : w) x /= log_step_;
      stencil_weights_[at] = std::move(w);
    }
  }

  double xi_min_;
  std::size_t count_;
  double log_step_ = 0.0;
  std::vector<double> nodes_;
  std::vector<std::vector<double>> stencil_weights_;
};

/// Precomputed evaluation recipe for one query point on a grid. Lets repeated
/// evaluations at fixed abscissae skip the bracket search and basis evaluation.
struct InterpStencil {
  enum class Kind { Origin, SubGrid, Hermite };
  Kind kind = Kind::Origin;
  std::size_t index = 0;
  // SubGrid: log(xi / xi_min). Hermite: basis weights for v_k, m_k, v_k+1, m_k+1.
  std::array<double, 4> weights{};
};

/// Sampled even, real characteristic function on an XiGrid. The value at xi = 0 is
/// exactly 1; all nodal values lie in [-1, 1].
///
/// Between nodes the interpolant is a cubic Hermite spline in log(xi) whose node slopes
/// come from sixth-order finite differences, passed through the Fritsch-Carlson
/// monotonicity filter. Below xi_min the model exp(-a xi^s) = 1 - a xi^s + O(xi^{2s}) is
/// used with `a` fitted to the first node, which is exact for the equilibria; s is the
/// small-xi exponent of the data (q for data in the domain of attraction of the Levy
/// equilibrium, 2 for finite-energy data).
class SpectralDensity {
public:
  SpectralDensity(XiGrid grid, std::vector<double> values, double small_xi_exponent)
      : grid_(std::move(grid)), values_(std::move(values)), exponent_(small_xi_exponent) {
    detail::require(values_.size() == grid_.size(), "SpectralDensity: size mismatch with grid");
    detail::require(exponent_ > 0.0, "SpectralDensity: small-xi exponent must be > 0");
    for (double& v : values_) {
      if (!std::isfinite(v) || std::abs(v) > 1.0 + 1e-9)
        throw DomainError("SpectralDensity: value outside [-1, 1]");
      v = std::clamp(v, -1.0, 1.0);
    }
    compute_slopes();
  }

  const XiGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> slopes() const noexcept { return slopes_; }
  double value_at_zero() const noexcept { return 1.0; }
  double small_xi_exponent() const noexcept { return exponent_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }

  double apply(const InterpStencil& s) const {
    double v = 1.0;
    switch (s.kind) {
      case InterpStencil::Kind::Origin:
        return 1.0;
      case InterpStencil::Kind::SubGrid:
        v = sub_grid(s.weights[0]);
        break;
      case InterpStencil::Kind::Hermite: {
        const std::size_t k = s.index;
        v = s.weights[0] * values_[k] + s.weights[1] * slopes_[k] + s.weights[2] * values_[k + 1] +
            s.weights[3] * slopes_[k + 1];
        break;
      }
    }
    return std::clamp(v, -1.0, 1.0);
  }

  double operator()(double xi) const;

private:
  // u = log(xi / xi_min) < 0.
  double sub_grid(double u) const {
    const double v0 = values_[0];
    const double r = std::exp(exponent_ * u);
    if (v0 > 0.0) return std::exp(std::log(v0) * r);
    return 1.0 - (1.0 - v0) * r;
  }

  void compute_slopes() {
    const std::size_t n = values_.size();
    slopes_.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const auto [start, w] = grid_.slope_stencil(j);
      double d = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) d += w[k] * values_[start + k];
      slopes_[j] = d;
    }
    // Fritsch-Carlson filter on uniform spacing h = log_step.
    const double h = grid_.log_step();
    std::vector<double> secant(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) secant[k] = (values_[k + 1] - values_[k]) / h;
    for (std::size_t k = 1; k + 1 < n; ++k)
      if (secant[k - 1] * secant[k] <= 0.0) slopes_[k] = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double d = secant[k];
      if (d == 0.0) {
        slopes_[k] = 0.0;
        slopes_[k + 1] = 0.0;
        continue;
      }
      double a = slopes_[k] / d;
      double b = slopes_[k + 1] / d;
      if (a < 0.0) slopes_[k] = 0.0, a = 0.0;
      if (b < 0.0) slopes_[k + 1] = 0.0, b = 0.0;
      const double r2 = a * a + b * b;
      if (r2 > 9.0) {
        const double tau = 3.0 / std::sqrt(r2);
        slopes_[k] = tau * a * d;
        slopes_[k + 1] = tau * b * d;
      }
    }
  }

  XiGrid grid_;
  std::vector<double> values_;
  std::vector<double> slopes_;
  double exponent_;
};

/// Builds the evaluation recipe for `xi` on `grid`. Throws if xi > xi_max.
inline InterpStencil make_stencil(const XiGrid& grid, double xi) {
  xi = std::abs(xi);
  InterpStencil s;
  if (xi == 0.0) return s;
  if (xi > grid.xi_max() * (1.0 + 1e-12))
    throw DomainError("interp: xi = " + std::to_string(xi) + " exceeds grid xi_max = " +
                      std::to_string(grid.xi_max()));
  if (xi < grid.xi_min()) {
    s.kind = InterpStencil::Kind::SubGrid;
    s.weights[0] = std::log(xi / grid.xi_min());
    return s;
  }
  const double h = grid.log_step();
  const double u = std::log(xi / grid.xi_min()) / h;
  auto k = static_cast<std::size_t>(std::floor(u));
  k = std::min(k, grid.size() - 2);
  const double t = std::clamp(u - static_cast<double>(k), 0.0, 1.0);
  const double t2 = t * t;
  const double t3 = t2 * t;
  s.kind = InterpStencil::Kind::Hermite;
  s.index = k;
  s.weights = {2.0 * t3 - 3.0 * t2 + 1.0, (t3 - 2.0 * t2 + t) * h, -2.0 * t3 + 3.0 * t2,
               (t3 - t2) * h};
  return s;
}

inline double SpectralDensity::operator()(double xi) const {
  return apply(make_stencil(grid_, xi));
}

inline double interp(const SpectralDensity& sd, double xi) { return sd(xi); }

/// Samples an arbitrary even evaluator at the grid nodes.
template <class F>
SpectralDensity tabulate(const XiGrid& grid, F&& f, double small_xi_exponent) {
  std::vector<double> v(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) v[j] = f(grid[j]);
  return {grid, std::move(v), small_xi_exponent};
}

// ---------------------------------------------------------------------------
// Initial data

/// Even initial data with closed-form characteristic functions. phi is the standard
/// Gaussian density, whose transform is exp(-xi^2/2).
class InitialDatum {
public:
  enum class Kind { Equilibrium, Mixture, Convolution, Gaussian };

  // Equilibrium with its own scale; a non-positive scale means "use params.alpha".
  static InitialDatum equilibrium(double alpha = 0.0) { return {Kind::Equilibrium, alpha}; }
  // 1/2 (M~_p + phi), M~_p with transform exp(-2 alpha |xi|^q).
  static InitialDatum mixture() { return {Kind::Mixture, 0.0}; }
  // M_p * phi.
  static InitialDatum convolution() { return {Kind::Convolution, 0.0}; }
  static InitialDatum gaussian(double s = 1.0) {
    detail::require(s > 0.0, "InitialDatum::gaussian: scale must be > 0");
    return {Kind::Gaussian, s};
  }

  Kind kind() const noexcept { return kind_; }
  double scale() const noexcept { return scale_; }
  bool has_sampler() const noexcept { return true; }
  bool finite_energy() const noexcept { return kind_ == Kind::Gaussian; }

  std::string tag() const {
    switch (kind_) {
      case Kind::Equilibrium: return "equilibrium";
      case Kind::Mixture: return "mixture";
      case Kind::Convolution: return "convolution";
      case Kind::Gaussian: return "gaussian";
    }
    return "unknown";
  }

  double equilibrium_alpha(const ModelParams& params) const {
    return kind_ == Kind::Equilibrium && scale_ > 0.0 ? scale_ : params.alpha();
  }

  double small_xi_exponent(const ModelParams& params) const {
    return finite_energy() ? 2.0 : params.q();
  }

private:
  InitialDatum(Kind k, double s) : kind_(k), scale_(s) {}
  Kind kind_;
  double scale_;
};

inline double gaussian_hat(double xi) { return std::exp(-0.5 * xi * xi); }

inline double initial_datum_hat(const InitialDatum& d, const ModelParams& params, double xi) {
  xi = std::abs(xi);
  const double xq = std::pow(xi, params.q());
  const double a = params.alpha();
  switch (d.kind()) {
    case InitialDatum::Kind::Equilibrium:
      return std::exp(-d.equilibrium_alpha(params) * xq);
    case InitialDatum::Kind::Mixture:
      return 0.5 * (std::exp(-2.0 * a * xq) + gaussian_hat(xi));
    case InitialDatum::Kind::Convolution:
      return std::exp(-a * xq) * gaussian_hat(xi);
    case InitialDatum::Kind::Gaussian: {
      const double s = d.scale() * xi;
      return std::exp(-0.5 * s * s);
    }
  }
  return 1.0;
}

/// Closed-form d/dxi of the datum's transform for xi > 0.
inline double initial_datum_hat_derivative(const InitialDatum& d, const ModelParams& params,
                                           double xi) {
  detail::require(xi > 0.0, "initial_datum_hat_derivative: xi must be > 0");
  const double q = params.q();
  const double a = params.alpha();
  const double xq = std::pow(xi, q);
  const double dxq = q * std::pow(xi, q - 1.0);
  const double g = gaussian_hat(xi);
  switch (d.kind()) {
    case InitialDatum::Kind::Equilibrium: {
      const double ae = d.equilibrium_alpha(params);
      return -ae * dxq * std::exp(-ae * xq);
    }
    case InitialDatum::Kind::Mixture:
      return 0.5 * (-2.0 * a * dxq * std::exp(-2.0 * a * xq) - xi * g);
    case InitialDatum::Kind::Convolution:
      return std::exp(-a * xq) * g * (-a * dxq - xi);
    case InitialDatum::Kind::Gaussian: {
      const double s2 = d.scale() * d.scale();
      return -s2 * xi * std::exp(-0.5 * s2 * xi * xi);
    }
  }
  return 0.0;
}

inline SpectralDensity sample_spectral(const InitialDatum& d, const ModelParams& params,
                                       const XiGrid& grid) {
  return tabulate(
      grid, [&](double xi) { return initial_datum_hat(d, params, xi); },
      d.small_xi_exponent(params));
}

// Type-erased even evaluator xi -> f^(xi), used by the closed-form solution operators.
using Evaluator = std::function<double(double)>;

inline Evaluator datum_evaluator(const InitialDatum& d, const ModelParams& params) {
  return [d, params](double xi) { return initial_datum_hat(d, params, xi); };
}

}  // namespace kacgraze
