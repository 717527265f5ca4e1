#pragma once

// Kolmogorov-distance bounds for normal approximation of Y = W + X where W
// has a bounded size-bias coupling and X is bounded independent noise.

#include <cmath>
#include <cstddef>
#include <limits>

#include "steinlab/couplings.hpp"
#include "steinlab/error.hpp"
#include "steinlab/poisson_bounds.hpp"

namespace steinlab {

struct NormalBoundInputs {
  double var_w = 0.0;
  double var_x = 0.0;
  double d_w = 0.0;
  double d_x = 0.0;
  double c = 1.0;      // W <= W* <= W + c
  double a = 0.0;      // 0 <= X <= a
  double mu = 1.0;     // E Y
  double sigma = 1.0;  // sqrt(Var Y)
  double p = 1.0;      // E W / mu
};

/// E | E[1 - (mu / var)(W* - W) | W] | from a joint table of (W, W*).
inline double d_w_exact(const SizeBiasCoupling& c, double mu, double var) {
  detail::require(std::isfinite(var) && var > 0.0, "var", "must be positive");
  double total = 0.0;
  for (std::size_t y = 0; y < c.rows(); ++y) {
    double py = 0.0, e_star = 0.0;
    for (std::size_t s = 0; s < c.cols(); ++s) {
      py += c(y, s);
      e_star += static_cast<double>(s) * c(y, s);
    }
    if (py == 0.0) continue;
    const double inner = 1.0 - (mu / var) * (e_star / py - static_cast<double>(y));
    total += py * std::abs(inner);
  }
  return total;
}

/// (Var W / s^2) D_W + (Var X / s^2) D_X + 0.82 c^2 mu / s^3 + c / s + (mu / s^2) a (1 - p).
/// A zero-variance component contributes nothing, whatever its D value.
inline BoundBreakdown normal_bound(const NormalBoundInputs& in) {
  detail::require(in.var_w >= 0.0 && std::isfinite(in.var_w), "var_w", "must be non-negative");
  detail::require(in.var_x >= 0.0 && std::isfinite(in.var_x), "var_x", "must be non-negative");
  detail::require(in.d_w >= 0.0, "d_w", "must be non-negative");
  detail::require(in.d_x >= 0.0, "d_x", "must be non-negative");
  detail::require(in.c > 0.0, "c", "must be positive");
  detail::require(in.a >= 0.0, "a", "must be non-negative");
  detail::require(in.mu > 0.0, "mu", "must be positive");
  detail::require(in.sigma > 0.0 && std::isfinite(in.sigma), "sigma", "must be positive");
  detail::require(in.p > 0.0 && in.p <= 1.0, "p", "must lie in (0, 1]");
  const double s2 = in.sigma * in.sigma;
  detail::require(std::abs(s2 - (in.var_w + in.var_x)) <= 1e-9 * std::max(1.0, s2), "sigma",
                  "sigma^2 must equal var_w + var_x");
  const double w_term = in.var_w > 0.0 ? in.var_w / s2 * in.d_w : 0.0;
  const double x_term = in.var_x > 0.0 ? in.var_x / s2 * in.d_x : 0.0;
  return make_breakdown({{"w_discrepancy", w_term},
                         {"x_discrepancy", x_term},
                         {"coupling_smooth", 0.82 * in.c * in.c * in.mu / (s2 * in.sigma)},
                         {"coupling_gap", in.c / in.sigma},
                         {"contamination", in.mu / s2 * in.a * (1.0 - in.p)}},
                        std::numeric_limits<double>::quiet_NaN(), in.p);
}

namespace detail {

inline void check_lightbulb(std::size_t n, double alpha, double tau_sq) {
  require(n >= 2 && n % 2 == 0, "n", "must be a positive even integer");
  require(alpha >= 0.0 && alpha < 1.0, "alpha", "must lie in [0, 1)");
  require(std::isfinite(tau_sq) && tau_sq > 0.0, "tau_sq", "must be positive");
}

/// (1/(2 sqrt n) + 1/(2n) + e^{-n/2}/3), the bracket in the D_W estimate.
inline double lightbulb_bracket(double n) {
  return 1.0 / (2.0 * std::sqrt(n)) + 1.0 / (2.0 * n) + std::exp(-n / 2.0) / 3.0;
}

}  // namespace detail

/// The displayed lightbulb bound for Y = W + Bin(k, alpha), with
/// sigma^2 = tau^2 + alpha (1 - alpha) k.
inline BoundBreakdown lightbulb_bound(std::size_t n, std::size_t k, double alpha, double tau_sq) {
  detail::check_lightbulb(n, alpha, tau_sq);
  const double nd = static_cast<double>(n), kd = static_cast<double>(k);
  const double s2 = tau_sq + alpha * (1.0 - alpha) * kd;
  const double s = std::sqrt(s2);
  return make_breakdown({{"w_discrepancy", nd / 2.0 * detail::lightbulb_bracket(nd) / s2},
                         {"x_discrepancy", alpha * std::sqrt(alpha * (1.0 - alpha) * kd) / s2},
                         {"coupling_smooth", 1.64 * nd / (s2 * s)},
                         {"coupling_gap", 2.0 / s},
                         {"contamination", alpha * kd * kd * nd / (s2 * (nd + 2.0 * alpha * kd))}},
                        std::numeric_limits<double>::quiet_NaN(), nd / (nd + 2.0 * alpha * kd));
}

/// Inputs obtained by feeding the lightbulb coupling estimates into
/// normal_bound: c = 2, a = k, E W = n/2, p = n / (n + 2 alpha k).
inline NormalBoundInputs lightbulb_inputs(std::size_t n, std::size_t k, double alpha, double tau_sq) {
  detail::check_lightbulb(n, alpha, tau_sq);
  const double nd = static_cast<double>(n), kd = static_cast<double>(k);
  NormalBoundInputs in;
  in.var_w = tau_sq;
  in.var_x = alpha * (1.0 - alpha) * kd;
  in.d_w = nd / (2.0 * tau_sq) * detail::lightbulb_bracket(nd);
  in.d_x = (k > 0 && alpha > 0.0) ? std::sqrt(alpha / ((1.0 - alpha) * kd)) : 0.0;
  in.c = 2.0;
  in.a = kd;
  in.mu = nd / 2.0 + alpha * kd;
  in.sigma = std::sqrt(in.var_w + in.var_x);
  in.p = (nd / 2.0) / in.mu;
  return in;
}

inline BoundBreakdown lightbulb_composition(std::size_t n, std::size_t k, double alpha, double tau_sq) {
  return normal_bound(lightbulb_inputs(n, k, alpha, tau_sq));
}

}  // namespace steinlab
