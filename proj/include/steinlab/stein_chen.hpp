#pragma once

// Solutions of the Stein-Chen equation
//
//   lambda g(j+1) - j g(j) = 1(j in A) - Po_lambda(A),   g(0) = 0,
//
// and the tail representation of P(Y in A) - Po_lambda(A) built from them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "steinlab/error.hpp"
#include "steinlab/pmf.hpp"

namespace steinlab {

struct SteinSolution {
  double lambda;
  std::vector<std::size_t> set_a;  // sorted, unique
  double pi_a;                     // Po_lambda(A)
  std::vector<double> g;           // g[0..M], g[0] = 0

  std::size_t cap() const noexcept { return g.size() - 1; }
  bool contains(std::size_t j) const { return std::binary_search(set_a.begin(), set_a.end(), j); }

  /// lambda g(j+1) - j g(j) - (1(j in A) - pi_a), for j < cap().
  double residual(std::size_t j) const {
    const double lhs = lambda * g[j + 1] - static_cast<double>(j) * g[j];
    return lhs - ((contains(j) ? 1.0 : 0.0) - pi_a);
  }
};

namespace detail {

inline double log_poisson(double lambda, std::size_t j) {
  const double jd = static_cast<double>(j);
  return -lambda + jd * std::log(lambda) - std::lgamma(jd + 1.0);
}

}  // namespace detail

/// Solves the Stein-Chen equation on {0..cap}.
///
/// g(j+1) = (1 / (lambda pi_j)) sum_{i<=j} pi_i (1_A(i) - Pi(A)) is used below
/// the mean and the equivalent upper-tail sum above it, so that every term is
/// a ratio pi_i / pi_j of at most about one. Plain forward recursion would
/// amplify round-off by j! / lambda^j.
inline SteinSolution solve_stein(double lambda, std::span<const std::size_t> set_a, std::size_t cap) {
  detail::require(std::isfinite(lambda) && lambda > 0.0, "lambda", "must be positive");
  detail::require(cap >= 1, "cap", "must be at least 1");
  std::vector<std::size_t> a(set_a.begin(), set_a.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  detail::require(a.empty() || a.back() <= cap, "cap", "must cover max(A)");

  SteinSolution s{lambda, a, 0.0, std::vector<double>(cap + 1, 0.0)};
  for (std::size_t i : a) s.pi_a += std::exp(detail::log_poisson(lambda, i));
  if (a.empty()) return s;

  std::vector<char> in_a(cap + 1, 0);
  for (std::size_t i : a) in_a[i] = 1;
  auto indicator = [&](std::size_t i) { return i <= cap && in_a[i] ? 1.0 : 0.0; };

  for (std::size_t j = 0; j < cap; ++j) {
    const double lj = detail::log_poisson(lambda, j);
    double sum = 0.0;
    if (static_cast<double>(j) < lambda) {
      for (std::size_t i = 0; i <= j; ++i)
        sum += std::exp(detail::log_poisson(lambda, i) - lj) * (indicator(i) - s.pi_a);
    } else {
      // Ratios pi_i / pi_j decay super-geometrically for i > j >= lambda.
      double ratio = 1.0;
      for (std::size_t i = j + 1;; ++i) {
        ratio *= lambda / static_cast<double>(i);
        sum += ratio * (s.pi_a - indicator(i));
        if (i > a.back() && ratio < 1e-20) break;
      }
    }
    s.g[j + 1] = sum / lambda;
  }
  return s;
}

/// max_{j < cap} |g(j+1) - g(j)|.
inline double delta_g_sup(const SteinSolution& s) {
  double m = 0.0;
  for (std::size_t j = 0; j + 1 < s.g.size(); ++j) m = std::max(m, std::abs(s.g[j + 1] - s.g[j]));
  return m;
}

/// The Stein factor (1 - e^{-lambda}) / lambda bounding sup |Delta g_A|.
inline double stein_factor(double lambda) { return -std::expm1(-lambda) / lambda; }

/// sum_k (lambda P(Y >= k) - mu P(Y* >= k+1)) Delta g_A(k), which equals
/// P(Y in A) - Po_lambda(A).
inline double key_identity_rhs(const Pmf& d, double lambda, std::span<const std::size_t> set_a) {
  const Pmf star = size_bias(d);
  const double mu = moments(d).mean;
  std::size_t max_a = 0;
  for (std::size_t i : set_a) max_a = std::max(max_a, i);
  const std::size_t n = d.cap();
  const auto sol = solve_stein(lambda, set_a, std::max(n, max_a) + 1);
  const auto ty = upper_tails(d, n + 2);
  const auto ts = upper_tails(star, n + 2);
  double rhs = 0.0;
  for (std::size_t k = 0; k <= n; ++k)
    rhs += (lambda * ty[k] - mu * ts[k + 1]) * (sol.g[k + 1] - sol.g[k]);
  return rhs;
}

}  // namespace steinlab
