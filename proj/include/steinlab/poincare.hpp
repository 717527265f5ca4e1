#pragma once

// Upper bounds on the discrete Poincare constant
//
//   R_Y = sup { E[g(Y)^2] / E[(g(Y+1) - g(Y))^2] : E g(Y) = 0 }
//
// under a relaxed size-bias ordering, plus an eigenvalue oracle for R_Y on a
// finite support.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "steinlab/error.hpp"
#include "steinlab/pmf.hpp"

namespace steinlab {

struct PoincareResult {
  double bound;
  std::optional<double> oracle;
  double lower_bound_var;
  double p_used;
  double h_star;
  /// The law was truncated from an infinite support before evaluation.
  bool truncated = false;
};

/// mu (1 + (1 - p) / (p h*)), valid when I_p Y* <=_st Y + 1.
inline double poincare_bound(double mu, double p, double h_star) {
  detail::require(std::isfinite(mu) && mu > 0.0, "mu", "must be positive");
  detail::require(p > 0.0 && p <= 1.0, "p", "must lie in (0, 1]");
  detail::require(h_star > 0.0 && h_star <= 1.0, "h_star", "must lie in (0, 1]");
  return mu * (1.0 + (1.0 - p) / (p * h_star));
}

/// (1/c) (1 + (1 - c mu) P(Y >= 1) / P(Y = 0)) under c-log-concavity.
inline double poincare_bound_logconcave(const Pmf& d) {
  const double c = c_log_concavity(d);
  detail::require(c > 0.0, "d", "law is not c-log-concave for any c > 0");
  detail::require(std::isfinite(c), "d", "point mass has no Poincare bound");
  const double mu = moments(d).mean;
  const double p0 = d[0];
  return (1.0 / c) * (1.0 + (1.0 - c * mu) * (1.0 - p0) / p0);
}

/// Bound for the zero-inflated Poisson law I_p Po(lambda).
inline double zip_poincare_bound(double p, double lambda) {
  detail::require(p > 0.0 && p <= 1.0, "p", "must lie in (0, 1]");
  detail::require(std::isfinite(lambda) && lambda > 0.0, "lambda", "must be positive");
  const double el = std::exp(lambda);
  const double worst = std::max(std::expm1(lambda) / lambda, el / ((1.0 - p) * el + p));
  return lambda * (p + (1.0 - p) * worst);
}

struct EigenOptions {
  double rel_tol = 1e-8;
  std::size_t max_iter = 200'000;
};

/// R_Y as the largest eigenvalue of D^{-1/2} C D^{-1/2}, where, writing g in
/// terms of its increments d_i = g(i+1) - g(i), the variance of g(Y) is
/// d' C d with C_ik = Cov(1(Y > i), 1(Y > k)) and the Dirichlet form is
/// d' D d with D = diag(P(Y = i)). The free value g(N+1) is set to g(N).
///
/// Requires an interval support of at least two points.
inline double poincare_oracle(const Pmf& d, EigenOptions opt = {}) {
  std::size_t lo = 0;
  while (d[lo] == 0.0) ++lo;
  const std::size_t hi = d.cap();
  detail::require(hi > lo, "d", "support must contain at least two points");
  for (std::size_t j = lo; j <= hi; ++j)
    detail::require(d[j] > 0.0, "d", "support must be an interval (the constant is infinite otherwise)");

  const std::size_t m = hi - lo;  // increments d_lo .. d_{hi-1}
  std::vector<double> cdf(hi + 1), tail(hi + 2, 0.0);
  double acc = 0.0;
  for (std::size_t j = 0; j <= hi; ++j) cdf[j] = acc += d[j];
  for (std::size_t j = hi + 1; j-- > 0;) tail[j] = tail[j + 1] + d[j];

  std::vector<double> b(m * m), scale(m);
  for (std::size_t i = 0; i < m; ++i) scale[i] = 1.0 / std::sqrt(d[lo + i]);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = i; k < m; ++k) {
      // Cov(1(Y > a), 1(Y > b)) = P(Y > b) P(Y <= a) for a <= b.
      const double cov = tail[lo + k + 1] * std::min(1.0, cdf[lo + i]);
      b[i * m + k] = b[k * m + i] = cov * scale[i] * scale[k];
    }

  // Start from g(x) = x, which attains the variance lower bound.
  std::vector<double> v(m), w(m);
  for (std::size_t i = 0; i < m; ++i) v[i] = 1.0 / scale[i];
  auto normalize = [](std::vector<double>& x) {
    double s = 0.0;
    for (double e : x) s += e * e;
    s = std::sqrt(s);
    for (double& e : x) e /= s;
  };
  normalize(v);
  double theta = 0.0;
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += b[i * m + k] * v[k];
      w[i] = s;
    }
    theta = 0.0;
    for (std::size_t i = 0; i < m; ++i) theta += v[i] * w[i];
    double res = 0.0;
    for (std::size_t i = 0; i < m; ++i) res += (w[i] - theta * v[i]) * (w[i] - theta * v[i]);
    // Rayleigh quotient error is O(residual^2 / gap); stop well inside rel_tol.
    if (std::sqrt(res) <= opt.rel_tol * 1e-2 * theta) return theta;
    v = w;
    normalize(v);
  }
  throw std::runtime_error("poincare_oracle: power iteration did not converge");
}

/// Theorem-style bound with h* taken from the law itself, side by side with
/// the oracle and the variance lower bound.
inline PoincareResult assess_poincare(const Pmf& d, double p) {
  const auto mom = moments(d);
  const auto fr = failure_rate(d);
  PoincareResult r{poincare_bound(mom.mean, p, fr.h_star), std::nullopt, mom.variance, p, fr.h_star,
                   d.truncated()};
  r.oracle = poincare_oracle(d);
  return r;
}

}  // namespace steinlab
