#pragma once

// Generative models: exact laws where a DP or closed form exists, seeded
// Monte Carlo simulators otherwise, and exact moments used as oracles.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <variant>
#include <vector>

#include "steinlab/empirical.hpp"
#include "steinlab/error.hpp"
#include "steinlab/pmf.hpp"
#include "steinlab/rng.hpp"

namespace steinlab {

// ---------------------------------------------------------------------------
// Model parameters

struct ZipModel {
  double p;
  double lambda;
};

struct LightbulbModel {
  std::size_t n;
};

/// Out-degree law of the random digraph: every vertex either picks exactly
/// `d` targets, or includes each other vertex independently with probability
/// r = psi log(n) / (n - 1).
struct DegreeSpec {
  enum class Kind { fixed, binomial } kind = Kind::fixed;
  std::size_t d = 0;
  double psi = 1.0;

  static DegreeSpec fixed(std::size_t d) { return {Kind::fixed, d, 1.0}; }
  static DegreeSpec binomial(double psi) { return {Kind::binomial, 0, psi}; }
};

struct EpidemicModel {
  std::size_t n;
  DegreeSpec degrees;
  double q;
};

struct ExtremesModel {
  std::size_t n;
  std::size_t m;
  double lambda;
};

struct SamplingModel {
  std::vector<unsigned> values;
  std::size_t m;
};

using ModelSpec = std::variant<ZipModel, LightbulbModel, EpidemicModel, ExtremesModel, SamplingModel>;

inline constexpr std::size_t kLightbulbCap = 600;

inline void validate(const ZipModel& z) {
  detail::require(z.p > 0.0 && z.p <= 1.0, "p", "must lie in (0, 1]");
  detail::require(std::isfinite(z.lambda) && z.lambda > 0.0, "lambda", "must be positive");
}
inline void validate(const LightbulbModel& l) {
  detail::require(l.n >= 2 && l.n % 2 == 0, "n", "must be a positive even integer");
}
inline void validate(const EpidemicModel& e) {
  detail::require(e.n >= 3, "n", "must be at least 3");
  detail::require(e.q > 0.0 && e.q <= 1.0, "q", "must lie in (0, 1]");
  if (e.degrees.kind == DegreeSpec::Kind::fixed)
    detail::require(e.degrees.d <= e.n - 1, "d", "must lie in [0, n - 1]");
  else
    detail::require(e.degrees.psi > 0.5 && e.degrees.psi <= 1.0, "psi", "must lie in (1/2, 1]");
}
inline void validate(const ExtremesModel& x) {
  detail::require(x.n >= 2, "n", "must be at least 2");
  detail::require(x.m >= 1 && x.m <= x.n, "m", "must lie in [1, n]");
  detail::require(std::isfinite(x.lambda) && x.lambda > 0.0, "lambda", "must be positive");
  detail::require(static_cast<double>(x.n) >= 2.0 * x.lambda, "lambda", "need n >= 2 lambda");
}
inline void validate(const SamplingModel& s) {
  detail::require(s.values.size() >= 2, "values", "need at least two values");
  detail::require(s.m >= 1 && s.m < s.values.size(), "m", "must satisfy 1 <= m < n");
  detail::require(std::any_of(s.values.begin(), s.values.end(), [](unsigned c) { return c > 0; }), "values",
                  "all values are zero");
}
inline void validate(const ModelSpec& spec) {
  std::visit([](const auto& m) { validate(m); }, spec);
}

// ---------------------------------------------------------------------------
// Zero-inflated Poisson

/// Law of I_p Z with Z ~ Po(lambda), I_p ~ Be(p) independent.
inline Pmf zip_pmf(double p, double lambda, TruncationPolicy policy = {}) {
  validate(ZipModel{p, lambda});
  const Pmf po = poisson_pmf(lambda, policy);
  std::vector<double> w(po.size());
  for (std::size_t j = 0; j < po.size(); ++j) w[j] = p * po[j];
  w[0] += 1.0 - p;
  return Pmf::normalized(std::move(w), p * po.omitted_mass());
}

inline EmpiricalLaw zip_simulate(double p, double lambda, std::uint64_t reps, std::uint64_t seed,
                                 unsigned threads = 1) {
  validate(ZipModel{p, lambda});
  const double l = std::exp(-lambda);
  return run_replicates<1>(reps, seed, threads, [&](Rng& rng) {
    const bool on = rng.bernoulli(p);
    // Knuth's product-of-uniforms Poisson sampler; lambda here is small.
    std::size_t k = 0;
    double prod = rng.uniform_open0();
    while (prod > l) {
      ++k;
      prod *= rng.uniform_open0();
    }
    return std::array<std::size_t, 1>{on ? k : 0};
  })[0];
}

// ---------------------------------------------------------------------------
// Lightbulb process

/// Exact law of the number of bulbs lit after rounds r = 1..n, where round r
/// toggles a uniformly random r-subset. From w lit bulbs, round r moves to
/// w + r - 2j with j hypergeometric(n, w, r).
inline Pmf lightbulb_exact(std::size_t n, std::size_t cap = kLightbulbCap) {
  validate(LightbulbModel{n});
  detail::require(n <= cap, "n", "exceeds the lightbulb DP cap");
  std::vector<double> lf(n + 1);
  for (std::size_t i = 0; i <= n; ++i) lf[i] = std::lgamma(static_cast<double>(i) + 1.0);
  auto log_choose = [&](std::size_t a, std::size_t b) { return lf[a] - lf[b] - lf[a - b]; };

  std::vector<double> cur(n + 1, 0.0), next(n + 1);
  cur[0] = 1.0;
  for (std::size_t r = 1; r <= n; ++r) {
    std::fill(next.begin(), next.end(), 0.0);
    const double lnr = log_choose(n, r);
    for (std::size_t w = 0; w <= n; ++w) {
      if (cur[w] == 0.0) continue;
      const std::size_t jlo = r > n - w ? r - (n - w) : 0, jhi = std::min(w, r);
      for (std::size_t j = jlo; j <= jhi; ++j) {
        const double h = std::exp(log_choose(w, j) + log_choose(n - w, r - j) - lnr);
        next[w + r - 2 * j] += cur[w] * h;
      }
    }
    std::swap(cur, next);
  }
  return Pmf::normalized(std::move(cur));
}

inline EmpiricalLaw lightbulb_simulate(std::size_t n, std::uint64_t reps, std::uint64_t seed,
                                       unsigned threads = 1) {
  validate(LightbulbModel{n});
  return run_replicates<1>(reps, seed, threads, [n](Rng& rng) {
    std::vector<char> lit(n, 0);
    std::vector<std::size_t> idx(n);
    for (std::size_t r = 1; r <= n; ++r) {
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      for (std::size_t i = 0; i < r; ++i) {  // partial Fisher-Yates
        const std::size_t j = i + rng.below(n - i);
        std::swap(idx[i], idx[j]);
        lit[idx[i]] ^= 1;
      }
    }
    return std::array<std::size_t, 1>{static_cast<std::size_t>(std::count(lit.begin(), lit.end(), 1))};
  })[0];
}

// ---------------------------------------------------------------------------
// Epidemic on a random digraph

struct EpidemicLaws {
  EmpiricalLaw isolated;     // xi W
  EmpiricalLaw susceptible;  // xi |S_inf|
};

/// Per replicate: every vertex i picks its out-neighbourhood L_i; W counts
/// vertices lying in no L_i; the epidemic starts from I_0 = {vertex 0} and
/// |S_inf| counts vertices never infected. An independent xi ~ Be(q)
/// (catastrophe when 0) multiplies both outputs.
inline EpidemicLaws epidemic_simulate(std::size_t n, DegreeSpec degrees, double q, std::uint64_t reps,
                                      std::uint64_t seed, unsigned threads = 1) {
  validate(EpidemicModel{n, degrees, q});
  const bool fixed = degrees.kind == DegreeSpec::Kind::fixed;
  const double r = fixed ? 0.0 : degrees.psi * std::log(static_cast<double>(n)) / static_cast<double>(n - 1);
  const double log1mr = std::log1p(-r);
  auto laws = run_replicates<2>(reps, seed, threads, [&](Rng& rng) {
    std::vector<std::uint32_t> edges;
    std::vector<std::size_t> start(n + 1, 0);
    std::vector<char> mark(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      start[i] = edges.size();
      auto vertex = [i](std::uint64_t c) { return static_cast<std::uint32_t>(c < i ? c : c + 1); };
      if (fixed) {
        // Floyd's algorithm: a uniform d-subset of the n - 1 candidates.
        const std::size_t d = degrees.d, m = n - 1;
        for (std::size_t j = m - d; j < m; ++j) {
          std::uint64_t t = rng.below(j + 1);
          if (mark[t]) t = j;
          mark[t] = 1;
          edges.push_back(vertex(t));
        }
        for (std::size_t e = start[i]; e < edges.size(); ++e) {
          const std::uint32_t v = edges[e];
          mark[v < i ? v : v - 1] = 0;
        }
      } else {
        // Independent inclusion via geometric gaps between successes.
        std::int64_t pos = -1;
        while (true) {
          pos += 1 + static_cast<std::int64_t>(std::floor(std::log(rng.uniform_open0()) / log1mr));
          if (pos >= static_cast<std::int64_t>(n - 1)) break;
          edges.push_back(vertex(static_cast<std::uint64_t>(pos)));
        }
      }
    }
    start[n] = edges.size();

    std::vector<char> hit(n, 0);
    for (auto v : edges) hit[v] = 1;
    const auto w = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 0));

    std::vector<char> infected(n, 0);
    std::vector<std::uint32_t> frontier{0}, next;
    infected[0] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
      next.clear();
      for (auto u : frontier)
        for (std::size_t e = start[u]; e < start[u + 1]; ++e)
          if (!infected[edges[e]]) {
            infected[edges[e]] = 1;
            next.push_back(edges[e]);
            ++reached;
          }
      std::swap(frontier, next);
    }
    const bool xi = rng.bernoulli(q);
    return std::array<std::size_t, 2>{xi ? w : 0, xi ? n - reached : 0};
  });
  return {std::move(laws[0]), std::move(laws[1])};
}

struct EpidemicMoments {
  double ew;
  double var_w;
};

/// Exact mean and variance of the isolated-vertex count when every vertex
/// picks exactly d targets.
inline EpidemicMoments epidemic_moments_fixed_degree(std::size_t n, std::size_t d) {
  detail::require(n >= 3, "n", "must be at least 3");
  detail::require(d <= n - 1, "d", "must lie in [0, n - 1]");
  const double nd = static_cast<double>(n), dd = static_cast<double>(d);
  const double avoid = (nd - 1.0 - dd) / (nd - 1.0);  // P(v not in L_i)
  const double iso = std::pow(avoid, nd - 1.0);
  // C(n-3, d) / C(n-1, d): chooser avoids two given vertices.
  const double avoid2 = d + 2 > n - 1 ? 0.0 : (nd - 1.0 - dd) * (nd - 2.0 - dd) / ((nd - 1.0) * (nd - 2.0));
  const double both = avoid * avoid * std::pow(avoid2, nd - 2.0);
  const double ew = nd * iso;
  double var = ew * (1.0 - iso) + nd * (nd - 1.0) * (both - iso * iso);
  if (var < 0.0 && var > -1e-12) var = 0.0;
  return {ew, var};
}

// ---------------------------------------------------------------------------
// Exceedances of moving sums of uniforms

/// Threshold offset t = 2 - z = sqrt(2 lambda / n).
inline double extremes_offset(std::size_t n, double lambda) { return std::sqrt(2.0 * lambda / static_cast<double>(n)); }

/// Y counts i in 1..n with X_i > 2 - t: X_i = U_i + U_{i-1} for i <= m,
/// independent copies of U + U' for i > m.
inline EmpiricalLaw extremes_simulate(std::size_t n, std::size_t m, double lambda, std::uint64_t reps,
                                      std::uint64_t seed, unsigned threads = 1) {
  validate(ExtremesModel{n, m, lambda});
  const double z = 2.0 - extremes_offset(n, lambda);
  return run_replicates<1>(reps, seed, threads, [&](Rng& rng) {
    std::size_t count = 0;
    double prev = rng.uniform();
    for (std::size_t i = 1; i <= m; ++i) {
      const double u = rng.uniform();
      if (u + prev > z) ++count;
      prev = u;
    }
    for (std::size_t i = m + 1; i <= n; ++i)
      if (rng.uniform() + rng.uniform() > z) ++count;
    return std::array<std::size_t, 1>{count};
  })[0];
}

struct ExtremesMoments {
  double mean, var;      // Y = W + X
  double mean_w, var_w;  // associated block, indices 1..m
  double mean_x, var_x;  // independent block, indices m+1..n
};

/// P(X_i > z) = t^2/2; adjacent indices of the associated block exceed
/// jointly with probability t^3/3; all other pairs are independent.
inline ExtremesMoments extremes_exact_moments(std::size_t n, std::size_t m, double lambda) {
  validate(ExtremesModel{n, m, lambda});
  const double t = extremes_offset(n, lambda);
  const double pi = t * t / 2.0;
  const double md = static_cast<double>(m), rest = static_cast<double>(n - m);
  ExtremesMoments r{};
  r.mean_w = md * pi;
  r.var_w = md * pi * (1.0 - pi) + 2.0 * (md - 1.0) * (t * t * t / 3.0 - pi * pi);
  r.mean_x = rest * pi;
  r.var_x = rest * pi * (1.0 - pi);
  r.mean = r.mean_w + r.mean_x;
  r.var = r.var_w + r.var_x;
  return r;
}

// ---------------------------------------------------------------------------
// Simple random sampling

inline constexpr std::size_t kSamplingDpCap = 20'000'000;

/// Exact law of the sum of a size-m sample drawn without replacement, by a
/// DP over (items seen, items chosen, running sum): item i is taken with
/// probability (m - chosen) / (n - i).
inline Pmf sampling_exact(std::span<const unsigned> values, std::size_t m) {
  validate(SamplingModel{{values.begin(), values.end()}, m});
  const std::size_t n = values.size();
  const std::size_t total = std::accumulate(values.begin(), values.end(), std::size_t{0});
  detail::require(static_cast<double>(m + 1) * static_cast<double>(total + 1) <= static_cast<double>(kSamplingDpCap),
                  "values", "sampling DP cap exceeded");
  const std::size_t width = total + 1;
  std::vector<double> cur((m + 1) * width, 0.0), next(cur.size());
  cur[0] = 1.0;
  std::size_t reach = 0;  // largest attainable running sum so far
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(next.begin(), next.end(), 0.0);
    const double left = static_cast<double>(n - i);
    const std::size_t c = values[i];
    for (std::size_t k = 0; k <= std::min(i, m); ++k) {
      const double take = static_cast<double>(m - k) / left;
      for (std::size_t s = 0; s <= reach; ++s) {
        const double v = cur[k * width + s];
        if (v == 0.0) continue;
        if (take < 1.0) next[k * width + s] += v * (1.0 - take);
        if (take > 0.0) next[(k + 1) * width + s + c] += v * take;
      }
    }
    reach += c;
    std::swap(cur, next);
  }
  return Pmf::normalized(std::vector<double>(cur.begin() + static_cast<std::ptrdiff_t>(m * width), cur.end()));
}

}  // namespace steinlab
