#pragma once

// Total-variation bounds for Poisson approximation, each returned with its
// named terms itemized (the common (1 - e^{-lambda}) prefactor folded into
// every term) so that the total is the sum of the parts.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "steinlab/error.hpp"
#include "steinlab/pmf.hpp"

namespace steinlab {

struct BoundTerm {
  std::string label;
  double value;
};

struct BoundBreakdown {
  std::vector<BoundTerm> terms;
  double total = 0.0;
  double lambda_used = 0.0;
  double p_used = 1.0;

  /// A bound above one carries no information about a distance in [0, 1].
  bool vacuous() const noexcept { return total > 1.0; }
  /// Only reachable when hypotheses are violated (e.g. Var > mean in a
  /// negatively related model); reported rather than clamped.
  bool negative() const noexcept { return total < 0.0; }

  double term(const std::string& label) const {
    for (const auto& t : terms)
      if (t.label == label) return t.value;
    throw InputError("label", "no term named " + label);
  }
};

inline BoundBreakdown make_breakdown(std::vector<BoundTerm> terms, double lambda, double p) {
  BoundBreakdown b{std::move(terms), 0.0, lambda, p};
  for (const auto& t : b.terms) b.total += t.value;
  return b;
}

namespace detail {

inline void check_mean(double mu) { require(std::isfinite(mu) && mu > 0.0, "mu", "must be positive"); }
inline void check_var(double var) { require(std::isfinite(var) && var >= 0.0, "var", "must be non-negative"); }
inline void check_lambda(double lambda) {
  require(std::isfinite(lambda) && lambda > 0.0, "lambda", "must be positive");
}
// p = 0 is accepted: every bound below then degenerates to the trivial
// triangle-inequality bound, which is still valid.
inline void check_p(double p) { require(p >= 0.0 && p <= 1.0, "p", "must lie in [0, 1]"); }

inline double prefactor(double lambda) { return -std::expm1(-lambda); }

}  // namespace detail

/// (1 - e^{-mu}) (1 - var / mu), valid when W + 1 >=_st W*.
inline BoundBreakdown classic_bound(double mu, double var) {
  detail::check_mean(mu);
  detail::check_var(var);
  const double c = detail::prefactor(mu);
  return make_breakdown({{"base", c}, {"variance_ratio", -c * var / mu}}, mu, 1.0);
}

/// Negative-dependence bound under P(Y* <= Y + 1 | Y* >= x) >= p:
/// (1 - e^{-lambda}) {1 + mu + (|mu - p lambda| / lambda - p)(var / mu + mu)}.
inline BoundBreakdown bound_thm_i(double mu, double var, double p, double lambda) {
  detail::check_mean(mu);
  detail::check_var(var);
  detail::check_p(p);
  detail::check_lambda(lambda);
  const double c = detail::prefactor(lambda);
  const double e_star = var / mu + mu;
  return make_breakdown({{"base", c},
                         {"mean", c * mu},
                         {"coupling_penalty", c * (std::abs(mu - p * lambda) / lambda - p) * e_star}},
                        lambda, p);
}

/// Positive-dependence bound under P(Y* >= Y + 1 - Z | Y + 1 - Z >= x) >= p.
inline BoundBreakdown bound_thm_ii(double mu, double var, double p, double lambda, double mean_z) {
  detail::check_mean(mu);
  detail::check_var(var);
  detail::check_p(p);
  detail::check_lambda(lambda);
  detail::require(std::isfinite(mean_z) && mean_z >= 0.0, "mean_z", "must be non-negative");
  const double c = detail::prefactor(lambda);
  const double e_star = var / mu + mu;
  return make_breakdown({{"slack", c * 2.0 * p * mean_z},
                         {"mismatch", c * (std::abs(mu - lambda) / lambda + 1.0) * e_star},
                         {"coupling_penalty", c * (1.0 - 2.0 * p) * (mu + 1.0)}},
                        lambda, p);
}

/// Bound for sums of negatively associated variables with lambda = mu.
inline BoundBreakdown neg_assoc_bound(double mu, double var, double p) {
  detail::check_mean(mu);
  detail::check_var(var);
  detail::check_p(p);
  const double c = detail::prefactor(mu);
  return make_breakdown(
      {{"base", c}, {"mean", c * mu}, {"coupling_penalty", c * (1.0 - 2.0 * p) * (var / mu + mu)}}, mu, p);
}

/// Exceedance counts of n identically distributed variables of which the
/// first m are associated and the rest an independent block.
inline BoundBreakdown extremes_bound(std::size_t n, std::size_t m, double lambda, double var_y) {
  detail::require(n >= 1, "n", "must be at least 1");
  detail::require(m >= 1 && m <= n, "m", "must lie in [1, n]");
  detail::check_lambda(lambda);
  detail::check_var(var_y);
  const double c = detail::prefactor(lambda);
  const double nd = static_cast<double>(n), md = static_cast<double>(m);
  std::vector<BoundTerm> terms{{"variance_excess", c * (var_y / lambda - 1.0)}};
  if (m == n) {
    terms.push_back({"self_term", c * 2.0 * lambda / nd});
  } else {
    terms.push_back({"contamination", c * 2.0 * (nd - md) * (lambda + 1.0) / nd});
    terms.push_back({"self_term", c * 2.0 * md * lambda / (nd * nd)});
  }
  return make_breakdown(std::move(terms), lambda, md / nd);
}

/// The moving-window uniform example: X_i = U_i + U_{i-1} on the associated
/// block of size m, independent copies of X_1 on the remaining n - m indices.
/// `ew` is E W for the associated block; `mean_x`, `var_x` describe the rest.
inline BoundBreakdown unif_window_bound(std::size_t n, std::size_t m, double lambda, double ew,
                                        double mean_x, double var_x) {
  detail::require(n >= 1, "n", "must be at least 1");
  detail::require(m >= 1 && m <= n, "m", "must lie in [1, n]");
  detail::check_lambda(lambda);
  const double c = detail::prefactor(lambda);
  const double nd = static_cast<double>(n), md = static_cast<double>(m);
  if (m == n) {
    return make_breakdown({{"dependence", c * (4.0 / 3.0) * std::sqrt(2.0 * lambda / nd)},
                           {"self_term", c * 2.0 * lambda / nd}},
                          lambda, 1.0);
  }
  detail::require(ew >= 0.0, "ew", "must be non-negative");
  detail::require(mean_x > 0.0, "mean_x", "must be positive when m < n");
  detail::require(var_x >= 0.0, "var_x", "must be non-negative");
  return make_breakdown({{"dependence", c * (4.0 / 3.0) * ew * std::sqrt(2.0 / (md * lambda))},
                         {"noise_dispersion", c * ((nd - md) / nd) * (var_x / mean_x - 1.0)},
                         {"contamination", c * 2.0 * (nd - md) * (lambda + 1.0) / nd},
                         {"self_term", c * 2.0 * md * lambda / (nd * nd)}},
                        lambda, md / nd);
}

/// Catastrophe-thinned isolated-vertex count xi W against Po(Lambda).
inline BoundBreakdown epidemic_bound(double capital_lambda, double var_w, double q) {
  detail::require(std::isfinite(capital_lambda) && capital_lambda > 0.0, "capital_lambda",
                  "must be positive");
  detail::check_var(var_w);
  detail::require(q > 0.0 && q <= 1.0, "q", "must lie in (0, 1]");
  return make_breakdown({{"catastrophe", (1.0 - q) * (1.0 + capital_lambda)},
                         {"variance_deficit", (q / capital_lambda) * (capital_lambda - var_w)}},
                        capital_lambda, q);
}

// ---------------------------------------------------------------------------
// Sums of (negatively) associated variables

/// Explicit joint law of (X_1..X_n): one outcome vector per atom.
struct JointLaw {
  std::size_t n = 0;
  std::vector<std::vector<unsigned>> outcomes;
  std::vector<double> probs;
};

struct ThetaStats {
  /// theta[j] for j >= 1; theta[0] is unused and zero.
  std::vector<double> theta;
  double theta_total;
  double p_assoc;
  /// E Z for Z = X_V + Z_V with P(V = i) = E X_i / E Y.
  double ez_pos;
};

inline constexpr std::size_t kDefaultEnumerationCap = 10'000'000;

/// Product law of independent coordinates.
inline JointLaw product_law(std::span<const Pmf> marginals, std::size_t cap = kDefaultEnumerationCap) {
  JointLaw law;
  law.n = marginals.size();
  double count = 1.0;
  for (const auto& m : marginals) count *= static_cast<double>(m.size());
  detail::require(count <= static_cast<double>(cap), "marginals", "enumeration cap exceeded");
  law.outcomes.push_back({});
  law.probs.push_back(1.0);
  for (const auto& m : marginals) {
    JointLaw next;
    for (std::size_t o = 0; o < law.outcomes.size(); ++o)
      for (std::size_t v = 0; v < m.size(); ++v) {
        if (m[v] == 0.0) continue;
        auto out = law.outcomes[o];
        out.push_back(static_cast<unsigned>(v));
        next.outcomes.push_back(std::move(out));
        next.probs.push_back(law.probs[o] * m[v]);
      }
    law.outcomes = std::move(next.outcomes);
    law.probs = std::move(next.probs);
  }
  return law;
}

/// theta_j = (1/j) sum_i E[X_i 1(X_i + Z_i = j)] with Z_i = sum_{k in J(i)} X_k,
/// by exhaustive enumeration of the joint law.
inline ThetaStats theta_stats(const JointLaw& law, const std::vector<std::vector<std::size_t>>& neighborhoods,
                              std::size_t cap = kDefaultEnumerationCap) {
  detail::require(law.outcomes.size() == law.probs.size(), "joint_law", "outcome/probability count mismatch");
  detail::require(law.outcomes.size() <= cap, "joint_law", "enumeration cap exceeded");
  detail::require(neighborhoods.size() == law.n, "neighborhoods", "need one set per coordinate");
  for (std::size_t i = 0; i < law.n; ++i)
    for (std::size_t k : neighborhoods[i])
      detail::require(k < law.n && k != i, "neighborhoods", "J(i) must be a subset of {1..n} without i");
  double total_prob = 0.0;
  for (std::size_t o = 0; o < law.outcomes.size(); ++o) {
    detail::require(law.outcomes[o].size() == law.n, "joint_law", "outcome has wrong length");
    detail::require(law.probs[o] >= 0.0, "joint_law", "negative probability");
    total_prob += law.probs[o];
  }
  detail::require(std::abs(total_prob - 1.0) <= 1e-10, "joint_law", "probabilities must sum to 1");

  std::vector<double> weighted;  // sum_i E[X_i 1(X_i + Z_i = j)]
  std::vector<double> mean_x(law.n, 0.0), mean_xz(law.n, 0.0);
  for (std::size_t o = 0; o < law.outcomes.size(); ++o) {
    const auto& x = law.outcomes[o];
    const double w = law.probs[o];
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < law.n; ++i) {
      std::size_t s = x[i];
      for (std::size_t k : neighborhoods[i]) s += x[k];
      mean_x[i] += w * x[i];
      mean_xz[i] += w * static_cast<double>(s);
      if (x[i] == 0) continue;
      if (weighted.size() <= s) weighted.resize(s + 1, 0.0);
      weighted[s] += w * x[i];
    }
  }
  ThetaStats t{std::vector<double>(std::max<std::size_t>(weighted.size(), 2), 0.0), 0.0, 1.0, 0.0};
  double first_moment = 0.0;  // sum_j j theta_j
  for (std::size_t j = 1; j < weighted.size(); ++j) {
    t.theta[j] = weighted[j] / static_cast<double>(j);
    t.theta_total += t.theta[j];
    first_moment += weighted[j];
  }
  const double ey = std::accumulate(mean_x.begin(), mean_x.end(), 0.0);
  if (first_moment > 0.0) t.p_assoc = t.theta[1] / first_moment;
  if (ey > 0.0)
    for (std::size_t i = 0; i < law.n; ++i) t.ez_pos += mean_x[i] / ey * mean_xz[i];
  return t;
}

struct SamplingBound {
  double mu;
  double var;
  double p;
  BoundBreakdown bound;
};

/// Sum of a size-m simple random sample drawn without replacement from c.
inline SamplingBound sampling_bound(std::span<const unsigned> values, std::size_t m) {
  const std::size_t n = values.size();
  detail::require(n >= 2, "values", "need at least two values");
  detail::require(m >= 1 && m < n, "m", "must satisfy 1 <= m < n");
  double s1 = 0.0, s2 = 0.0, ones = 0.0;
  for (unsigned c : values) {
    s1 += c;
    s2 += static_cast<double>(c) * c;
    if (c == 1) ones += 1.0;
  }
  detail::require(s1 > 0.0, "values", "all values are zero");
  const double nd = static_cast<double>(n), md = static_cast<double>(m);
  const double mu = md / nd * s1;
  double var = md / nd * s2 + md * (md - 1.0) / (nd * (nd - 1.0)) * (s1 * s1 - s2) - md * md / (nd * nd) * s1 * s1;
  if (var < 0.0 && var > -1e-9 * std::max(1.0, s1 * s1)) var = 0.0;
  const double p = ones / s1;
  return {mu, var, p, neg_assoc_bound(mu, var, p)};
}

}  // namespace steinlab
