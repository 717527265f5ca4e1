#pragma once

// Finite probability mass functions on {0, 1, ..., N} and the exact
// operations the bound checkers are built on: moments, convolution,
// size-biasing, distances, tails, failure rates and ordering diagnostics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "steinlab/error.hpp"

namespace steinlab {

namespace tol {
inline constexpr double normalization = 1e-12;
inline constexpr double ordering = 1e-12;
inline constexpr double variance_clamp = 1e-12;
}  // namespace tol

/// Mass allowed beyond the cap when an infinite-support law is truncated.
struct TruncationPolicy {
  double tail_epsilon = 1e-12;
};

/// A law on the non-negative integers with finite support {0..cap()}.
///
/// Masses are normalized to sum to one and carry no trailing zeros. Laws that
/// were obtained by truncating an infinite-support distribution record the
/// discarded mass in `omitted_mass()`; the stored masses are then the
/// conditional law given the cap, so the total variation distance to the
/// untruncated law equals `omitted_mass()`.
class Pmf {
 public:
  /// Point mass at zero.
  Pmf() : probs_{1.0} {}

  /// Normalizes `raw` and trims trailing zeros. Tiny negative round-off
  /// (above -1e-15) is clamped; anything else negative or non-finite throws.
  static Pmf normalized(std::vector<double> raw, double omitted_mass = 0.0) {
    for (double& w : raw) {
      detail::require(std::isfinite(w), "weights", "non-finite weight");
      if (w < 0.0 && w > -1e-15) w = 0.0;
      detail::require(w >= 0.0, "weights", "negative weight");
    }
    while (!raw.empty() && raw.back() == 0.0) raw.pop_back();
    detail::require(!raw.empty(), "weights", "all weights are zero");
    const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
    for (double& w : raw) w /= total;
    Pmf d;
    d.probs_ = std::move(raw);
    d.omitted_ = std::clamp(omitted_mass, 0.0, 1.0);
    return d;
  }

  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t cap() const noexcept { return probs_.size() - 1; }
  std::size_t size() const noexcept { return probs_.size(); }

  double operator[](std::size_t j) const noexcept { return j < probs_.size() ? probs_[j] : 0.0; }
  double at(long j) const noexcept { return j < 0 ? 0.0 : (*this)[static_cast<std::size_t>(j)]; }

  double omitted_mass() const noexcept { return omitted_; }
  bool truncated() const noexcept { return omitted_ > 0.0; }

  friend bool operator==(const Pmf&, const Pmf&) = default;

 private:
  std::vector<double> probs_;
  double omitted_ = 0.0;
};

struct Moments {
  double mean;
  double variance;
};

struct TvDistance {
  double value;
  /// Additive uncertainty from truncated inputs.
  double error_bound;
};

struct FailureRate {
  /// h(j) = P(Y = j) / P(Y >= j); zero at indices carrying no mass.
  std::vector<double> rate;
  /// Infimum of h over points with positive mass.
  double h_star;
};

struct OrderCheck {
  bool dominates;
  double max_violation;
};

// ---------------------------------------------------------------------------
// Construction

inline Pmf make_pmf(std::span<const double> weights) {
  return Pmf::normalized(std::vector<double>(weights.begin(), weights.end()));
}

inline Pmf make_pmf(std::initializer_list<double> weights) {
  return Pmf::normalized(std::vector<double>(weights));
}

inline Pmf point_mass(std::size_t k) {
  std::vector<double> w(k + 1, 0.0);
  w[k] = 1.0;
  return Pmf::normalized(std::move(w));
}

inline Pmf bernoulli(double q) {
  detail::require(q >= 0.0 && q <= 1.0, "q", "must lie in [0, 1]");
  return Pmf::normalized({1.0 - q, q});
}

inline Pmf binomial(std::size_t n, double q) {
  detail::require(q >= 0.0 && q <= 1.0, "q", "must lie in [0, 1]");
  if (q == 0.0) return point_mass(0);
  if (q == 1.0) return point_mass(n);
  std::vector<double> w(n + 1);
  const double lq = std::log(q), l1q = std::log1p(-q);
  const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
  for (std::size_t j = 0; j <= n; ++j) {
    const double jd = static_cast<double>(j);
    w[j] = std::exp(lgn - std::lgamma(jd + 1.0) - std::lgamma(static_cast<double>(n - j) + 1.0) +
                    jd * lq + static_cast<double>(n - j) * l1q);
  }
  return Pmf::normalized(std::move(w));
}

/// Geometric law p_j proportional to rho^j on {0..cap}.
inline Pmf truncated_geometric(double rho, std::size_t cap) {
  detail::require(rho > 0.0 && rho < 1.0, "rho", "must lie in (0, 1)");
  std::vector<double> w(cap + 1);
  double x = 1.0;
  for (auto& v : w) {
    v = x;
    x *= rho;
  }
  return Pmf::normalized(std::move(w));
}

/// Po(lambda) truncated at the smallest cap whose upper tail is at most
/// `policy.tail_epsilon`. The discarded tail is recorded as omitted mass.
inline Pmf poisson_pmf(double lambda, TruncationPolicy policy = {}) {
  detail::require(std::isfinite(lambda) && lambda > 0.0, "lambda", "must be positive");
  detail::require(policy.tail_epsilon > 0.0 && policy.tail_epsilon < 1.0, "tail_epsilon",
                  "must lie in (0, 1)");
  // Evaluate far enough out that the remainder is below double resolution of eps.
  std::vector<double> p;
  const double floor_mass = policy.tail_epsilon * 1e-20;
  for (std::size_t j = 0;; ++j) {
    const double jd = static_cast<double>(j);
    const double v = std::exp(-lambda + jd * std::log(lambda) - std::lgamma(jd + 1.0));
    p.push_back(v);
    if (jd > lambda && v < floor_mass) break;
  }
  // suffix[j] = sum_{i >= j} p_i
  std::vector<double> suffix(p.size() + 1, 0.0);
  for (std::size_t j = p.size(); j-- > 0;) suffix[j] = suffix[j + 1] + p[j];
  std::size_t cap = 0;
  while (suffix[cap + 1] > policy.tail_epsilon) ++cap;
  const double omitted = suffix[cap + 1];
  p.resize(cap + 1);
  return Pmf::normalized(std::move(p), omitted);
}

/// Law of Y + k.
inline Pmf shift(const Pmf& d, std::size_t k) {
  std::vector<double> w(d.size() + k, 0.0);
  std::copy(d.probs().begin(), d.probs().end(), w.begin() + static_cast<std::ptrdiff_t>(k));
  return Pmf::normalized(std::move(w), d.omitted_mass());
}

/// weight_a * a + (1 - weight_a) * b.
inline Pmf mixture(double weight_a, const Pmf& a, const Pmf& b) {
  detail::require(weight_a >= 0.0 && weight_a <= 1.0, "weight", "must lie in [0, 1]");
  std::vector<double> w(std::max(a.size(), b.size()), 0.0);
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = weight_a * a[j] + (1.0 - weight_a) * b[j];
  return Pmf::normalized(std::move(w),
                         weight_a * a.omitted_mass() + (1.0 - weight_a) * b.omitted_mass());
}

/// Law of xi * W with xi ~ Be(q) independent of W.
inline Pmf bernoulli_thin(const Pmf& w, double q) {
  detail::require(q >= 0.0 && q <= 1.0, "q", "must lie in [0, 1]");
  return mixture(q, w, point_mass(0));
}

// ---------------------------------------------------------------------------
// Functionals

inline Moments moments(const Pmf& d) {
  double mean = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) mean += static_cast<double>(j) * d[j];
  double var = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const double c = static_cast<double>(j) - mean;
    var += c * c * d[j];
  }
  if (var < 0.0 && var > -tol::variance_clamp) var = 0.0;
  return {mean, var};
}

inline double upper_tail(const Pmf& d, std::size_t k) {
  if (k == 0) return 1.0;
  double s = 0.0;
  for (std::size_t j = d.size(); j-- > k;) s += d[j];
  return s;
}

/// tails[k] = P(Y >= k) for k = 0..len-1, summed from the top for accuracy.
inline std::vector<double> upper_tails(const Pmf& d, std::size_t len) {
  std::vector<double> t(len, 0.0);
  double s = 0.0;
  for (std::size_t j = std::max(len, d.size()); j-- > 0;) {
    s += d[j];
    if (j < len) t[j] = s;
  }
  if (len > 0) t[0] = 1.0;
  return t;
}

inline Pmf convolve(const Pmf& a, const Pmf& b) {
  std::vector<double> w(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) w[i + j] += a[i] * b[j];
  }
  const double ta = a.omitted_mass(), tb = b.omitted_mass();
  return Pmf::normalized(std::move(w), ta + tb - ta * tb);
}

/// The size-biased law P(Y* = j) = j P(Y = j) / E Y.
///
/// For a truncated input the recorded omitted mass is carried over unchanged;
/// it is then indicative rather than certified.
inline Pmf size_bias(const Pmf& d) {
  const double mean = moments(d).mean;
  detail::require(mean > 0.0, "d", "size-biasing needs a positive mean");
  std::vector<double> w(d.size());
  for (std::size_t j = 0; j < d.size(); ++j) w[j] = static_cast<double>(j) * d[j] / mean;
  return Pmf::normalized(std::move(w), d.omitted_mass());
}

inline TvDistance tv_distance(const Pmf& a, const Pmf& b) {
  const std::size_t n = std::max(a.size(), b.size());
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += std::abs(a[j] - b[j]);
  return {std::min(1.0, 0.5 * s), a.omitted_mass() + b.omitted_mass()};
}

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// sup_z |P((Y - mu)/sigma <= z) - Phi(z)|, evaluated at every atom both at
/// the CDF value and at its left limit.
inline double kolmogorov_to_std_normal(const Pmf& d, double mu, double sigma) {
  detail::require(sigma > 0.0 && std::isfinite(sigma), "sigma", "must be positive");
  double cdf = 0.0, worst = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (d[j] == 0.0) continue;
    const double phi = std_normal_cdf((static_cast<double>(j) - mu) / sigma);
    worst = std::max(worst, std::abs(cdf - phi));
    cdf += d[j];
    worst = std::max(worst, std::abs(std::min(cdf, 1.0) - phi));
  }
  return worst;
}

// Open question resolved: h is evaluated only at points of positive mass.
inline FailureRate failure_rate(const Pmf& d) {
  const auto tails = upper_tails(d, d.size());
  FailureRate fr{std::vector<double>(d.size(), 0.0), std::numeric_limits<double>::infinity()};
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (d[j] == 0.0) continue;
    fr.rate[j] = std::min(1.0, d[j] / tails[j]);
    fr.h_star = std::min(fr.h_star, fr.rate[j]);
  }
  fr.rate.back() = 1.0;
  return fr;
}

/// c* = min_k [P(k)/P(k+1) - P(k-1)/P(k)] with P(-1) = 0.
///
/// Requires every point of {0..cap} to carry mass. Returns +infinity for a
/// point mass at zero (no ratio is defined).
inline double c_log_concavity(const Pmf& d) {
  for (std::size_t j = 0; j < d.size(); ++j)
    detail::require(d[j] > 0.0, "d", "support must be the full interval {0..N}");
  double c = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    const double prev = k == 0 ? 0.0 : d[k - 1] / d[k];
    c = std::min(c, d[k] / d[k + 1] - prev);
  }
  return c;
}

/// Does `a` dominate `b` in the usual stochastic order?
inline OrderCheck stochastic_order_check(const Pmf& a, const Pmf& b) {
  const std::size_t n = std::max(a.size(), b.size()) + 1;
  const auto ta = upper_tails(a, n), tb = upper_tails(b, n);
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, tb[k] - ta[k]);
  return {worst <= tol::ordering, worst};
}

}  // namespace steinlab
