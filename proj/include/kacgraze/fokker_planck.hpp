#pragma once

// Closed-form flows of the limiting equations in Fourier variables:
//
//   fractional Fokker-Planck   d/dt f + 2 alpha |xi|^q f + (p+1) xi d/dxi f = 0
//   pure drift (alpha -> 0)    d/dt f + (p+1) xi d/dxi f = 0
//
// and pointwise evaluation of the Levy equilibrium density.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kacgraze/error.hpp"
#include "kacgraze/model.hpp"
#include "kacgraze/quadrature.hpp"

namespace kacgraze {

/// Scalings of the Fokker-Planck solution at time t: f(t) = f0 dilated by beta,
/// convolved with M_p dilated by gamma.
struct FPState {
  ModelParams params;
  double beta = 1.0;
  double gamma = 0.0;
  double time = 0.0;
};

inline FPState fp_state(const ModelParams& params, double t) {
  detail::require(t >= 0.0, "fp_state: t must be >= 0");
  const double e = params.p() + 1.0;
  return {params, std::exp(-e * t), std::pow(-std::expm1(-2.0 * t), 0.5 * e), t};
}

inline double fp_solution_hat(const Evaluator& f0, const ModelParams& params, double t,
                              double xi) {
  detail::require(t >= 0.0, "fp_solution_hat: t must be >= 0");
  xi = std::abs(xi);
  const double dilated = f0(xi * std::exp(-(params.p() + 1.0) * t));
  const double spread = params.alpha() * std::pow(xi, params.q()) * -std::expm1(-2.0 * t);
  return std::clamp(dilated * std::exp(-spread), -1.0, 1.0);
}

inline double drift_solution_hat(const Evaluator& f0, const ModelParams& params, double t,
                                 double xi) {
  detail::require(t >= 0.0, "drift_solution_hat: t must be >= 0");
  return f0(std::abs(xi) * std::exp(-(params.p() + 1.0) * t));
}

/// The Fokker-Planck flow applied to f0 for time t, as a new evaluator.
inline Evaluator fp_flow(Evaluator f0, const ModelParams& params, double t) {
  return [f0 = std::move(f0), params, t](double xi) {
    return fp_solution_hat(f0, params, t, xi);
  };
}

inline Evaluator drift_flow(Evaluator f0, const ModelParams& params, double t) {
  return [f0 = std::move(f0), params, t](double xi) {
    return drift_solution_hat(f0, params, t, xi);
  };
}

/// d/dt f + 2 alpha |xi|^q f + (p+1) xi d/dxi f for a space-time field f(t, xi), with
/// centered differences (second-order one-sided in t when t < h_t).
template <class F>
double fp_residual(F&& f, const ModelParams& params, double t, double xi, double h_t = 1e-4,
                   double h_xi = 1e-4) {
  detail::require(xi > 0.0, "fp_residual: xi must be > 0");
  detail::require(t >= 0.0 && h_t > 0.0 && h_xi > 0.0, "fp_residual: invalid steps");
  const double value = f(t, xi);
  double dt;
  if (t >= h_t)
    dt = (f(t + h_t, xi) - f(t - h_t, xi)) / (2.0 * h_t);
  else
    dt = (-3.0 * value + 4.0 * f(t + h_t, xi) - f(t + 2.0 * h_t, xi)) / (2.0 * h_t);
  const double hx = std::min(h_xi, 0.5 * xi);
  const double dxi = (f(t, xi + hx) - f(t, xi - hx)) / (2.0 * hx);
  return dt + 2.0 * params.alpha() * std::pow(xi, params.q()) * value +
         (params.p() + 1.0) * xi * dxi;
}

/// Density of the Levy equilibrium, (1/pi) int_0^inf cos(v xi) exp(-alpha xi^q) dxi.
/// The integration range is cut where the integrand drops below 1e-17 and split into
/// panels no wider than half an oscillation period.
inline double mp_physical(const ModelParams& params, double v) {
  constexpr double kTol = 1e-8;
  v = std::abs(v);
  const double a = params.alpha();
  const double q = params.q();
  const double cutoff = std::pow(40.0 / a, 1.0 / q);
  auto integrand = [&](double xi) { return std::cos(v * xi) * std::exp(-a * std::pow(xi, q)); };

  const double width = v > 0.0 ? std::min(cutoff, std::numbers::pi / v) : cutoff;
  const auto panels = static_cast<std::size_t>(std::ceil(cutoff / width));
  const double panel_tol = 0.1 * kTol / static_cast<double>(panels);
  double sum = 0.0;
  double err = 0.0;
  for (std::size_t k = 0; k < panels; ++k) {
    const double lo = static_cast<double>(k) * width;
    const double hi = std::min(cutoff, lo + width);
    const auto r = integrate_adaptive(integrand, lo, hi, panel_tol);
    if (!r.converged) throw ConvergenceError("mp_physical: panel quadrature did not converge");
    sum += r.value;
    err += r.error_estimate;
  }
  if (err > kTol) throw ConvergenceError("mp_physical: error estimate exceeds 1e-8");
  return sum / std::numbers::pi;
}

}  // namespace kacgraze
