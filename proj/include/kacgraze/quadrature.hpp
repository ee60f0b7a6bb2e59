#pragma once

// Quadrature rules shared by the kernel, Fokker-Planck and analysis modules.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "kacgraze/error.hpp"

namespace kacgraze {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) sum += weights[k] * f(nodes[k]);
    return sum;
  }
};

namespace detail {

// Returns {P_n(x), P_n'(x)} by the three-term recurrence.
inline std::pair<double, double> legendre_with_derivative(std::size_t n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (std::size_t k = 2; k <= n; ++k) {
    const auto kd = static_cast<double>(k);
    const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
    p0 = p1;
    p1 = p2;
  }
  const double dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace detail

/// Gauss-Legendre rule with `count` nodes mapped onto [a, b].
/// Nodes come from Newton iteration on P_n started at the Chebyshev guess.
inline QuadratureRule gauss_legendre(std::size_t count, double a, double b) {
  detail::require(count >= 2, "gauss_legendre: need at least two nodes");
  QuadratureRule rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  const auto n = static_cast<double>(count);
  for (std::size_t i = 0; i < (count + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = detail::legendre_with_derivative(count, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = detail::legendre_with_derivative(count, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[count - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[count - 1 - i] = half * w;
  }
  return rule;
}

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (positive half).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelEstimate {
  double value;
  double error;
};

template <class F>
PanelEstimate gauss_kronrod_15(F& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const double fc = f(mid);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (std::size_t k = 0; k < 7; ++k) {
    const double dx = half * kKronrodNodes[k];
    const double pair = f(mid - dx) + f(mid + dx);
    kronrod += kKronrodWeights[k] * pair;
    if (k % 2 == 1) gauss += kGaussWeights[k / 2] * pair;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

template <class F>
double adaptive_panel(F& f, double a, double b, double tol, int depth, double& err_sum,
                      bool& ok) {
  const auto est = gauss_kronrod_15(f, a, b);
  if (est.error <= tol || depth <= 0) {
    if (est.error > tol) ok = false;
    err_sum += est.error;
    return est.value;
  }
  const double mid = 0.5 * (a + b);
  return adaptive_panel(f, a, mid, 0.5 * tol, depth - 1, err_sum, ok) +
         adaptive_panel(f, mid, b, 0.5 * tol, depth - 1, err_sum, ok);
}

}  // namespace detail

struct AdaptiveResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

/// Adaptive Gauss-Kronrod 7/15 on [a, b] with absolute tolerance `tol`.
template <class F>
AdaptiveResult integrate_adaptive(F&& f, double a, double b, double tol, int max_depth = 30) {
  AdaptiveResult r;
  r.value = detail::adaptive_panel(f, a, b, tol, max_depth, r.error_estimate, r.converged);
  return r;
}

/// Weights of the finite-difference approximation of the `order`-th derivative at `z`
/// from values at the points `x` (Fornberg's recursion).
inline std::vector<double> finite_difference_weights(double z, std::span<const double> x,
                                                     int order) {
  const std::size_t n = x.size();
  const auto m = static_cast<std::size_t>(order);
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k)
          c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k)
        c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = c[i][m];
  return w;
}

}  // namespace kacgraze
