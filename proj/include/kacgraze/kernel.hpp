#pragma once

// Grazing collision kernels: normalized indicators concentrating near theta = 0.

#include <cmath>
#include <numbers>
#include <random>

#include "kacgraze/error.hpp"
#include "kacgraze/model.hpp"
#include "kacgraze/quadrature.hpp"

namespace kacgraze {

namespace detail {

// (2x - sin 2x) / 4 = integral of sin^2 on [0, x], without cancellation at small x.
inline double sin2_primitive(double x) {
  const double y = 2.0 * x;
  if (std::abs(y) > 0.2) return 0.25 * (y - std::sin(y));
  // y - sin y = y^3/3! - y^5/5! + ...
  const double y2 = y * y;
  double term = y * y2 / 6.0;
  double sum = term;
  for (int k = 2; k < 12; ++k) {
    term *= -y2 / static_cast<double>((2 * k) * (2 * k + 1));
    sum += term;
  }
  return 0.25 * sum;
}

// 1 - |sin t|^{2+2p} - |cos t|^{2+2p}, accurate for small t.
inline double energy_loss_factor(double theta, double p) {
  const double s2 = std::sin(theta) * std::sin(theta);
  const double one_minus_cos = -std::expm1((1.0 + p) * std::log1p(-s2));
  return one_minus_cos - std::pow(s2, 1.0 + p);
}

}  // namespace detail

/// Indicator kernel b(theta) = A on c <= |theta| <= d, zero elsewhere, with
/// d = eps pi/4, c = d/2 and A fixed by the normalization of sin^2 theta b on [0, pi/2].
class GrazingKernel {
public:
  static constexpr std::size_t kQuadratureNodes = 32;

  explicit GrazingKernel(double eps) : eps_(eps) {
    detail::require(eps > 0.0, "make_kernel: eps must be > 0");
    if (eps > 1.0) throw DomainError("make_kernel: eps > 1 leaves the small-angle regime");
    d_ = eps * std::numbers::pi / 4.0;
    c_ = 0.5 * d_;
    amplitude_ = 1.0 / (detail::sin2_primitive(d_) - detail::sin2_primitive(c_));
    sigma_ = 2.0 * amplitude_ * (d_ - c_);
    rule_ = gauss_legendre(kQuadratureNodes, c_, d_);
  }

  double eps() const noexcept { return eps_; }
  double inner_edge() const noexcept { return c_; }
  double outer_edge() const noexcept { return d_; }
  double amplitude() const noexcept { return amplitude_; }
  /// Total rate sigma = integral of b over [-pi/2, pi/2].
  double sigma() const noexcept { return sigma_; }
  const QuadratureRule& quadrature() const noexcept { return rule_; }

  double operator()(double theta) const noexcept {
    const double a = std::abs(theta);
    return (a >= c_ && a <= d_) ? amplitude_ : 0.0;
  }

  /// One-sided integral of b(theta) g(theta) over [0, pi/2].
  template <class G>
  double integrate_half(G&& g) const {
    return rule_.integrate([&](double th) { return (*this)(th) * g(th); });
  }

  /// Integral over [0, pi/2] of b sin^2; equals 1 for every kernel of the family.
  double normalization() const {
    return integrate_half([](double th) { return std::sin(th) * std::sin(th); });
  }

private:
  double eps_;
  double c_ = 0.0;
  double d_ = 0.0;
  double amplitude_ = 0.0;
  double sigma_ = 0.0;
  QuadratureRule rule_;
};

inline GrazingKernel make_kernel(double eps) { return GrazingKernel(eps); }

/// L_eps = integral over [-pi/2, pi/2] of b (1 - |sin|^{2+2p} - |cos|^{2+2p}).
inline double energy_loss_rate(const GrazingKernel& k, const ModelParams& params) {
  const double p = params.p();
  return 2.0 * k.integrate_half([p](double th) { return detail::energy_loss_factor(th, p); });
}

/// J = integral over [-pi/2, pi/2] of b sin^2 cos^2; brackets L_eps between c_p J and 2 J.
inline double sin2cos2_moment(const GrazingKernel& k) {
  return 2.0 * k.integrate_half([](double th) {
    const double s = std::sin(th);
    const double c = std::cos(th);
    return s * s * c * c;
  });
}

inline double lower_bound_constant(const ModelParams& params) {
  const double p = params.p();
  return p * (1.0 + p) * std::pow(2.0, 1.0 - p);
}

/// Phi(y) = 1 - y^{1+p} - (1-y)^{1+p} - c_p y (1-y) on [0, 1].
inline double phi_lower(double y, const ModelParams& params) {
  detail::require(y >= 0.0 && y <= 1.0, "phi_lower: y must lie in [0, 1]");
  const double e = 1.0 + params.p();
  return 1.0 - std::pow(y, e) - std::pow(1.0 - y, e) - lower_bound_constant(params) * y * (1.0 - y);
}

/// Draws theta with density proportional to b: uniform |theta| on [c, d], random sign.
template <class Rng>
double sample_theta(const GrazingKernel& k, Rng& rng) {
  std::uniform_real_distribution<double> mag(k.inner_edge(), k.outer_edge());
  std::bernoulli_distribution sign(0.5);
  const double th = mag(rng);
  return sign(rng) ? th : -th;
}

}  // namespace kacgraze
