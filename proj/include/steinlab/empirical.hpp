#pragma once

// Monte Carlo frequency tables and a deterministic parallel replicate runner.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <thread>
#include <vector>

#include "steinlab/error.hpp"
#include "steinlab/pmf.hpp"
#include "steinlab/rng.hpp"

namespace steinlab {

struct EmpiricalLaw {
  std::vector<std::uint64_t> counts;  // counts[v] = replicates with outcome v
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;

  void add(std::size_t value, std::uint64_t times = 1) {
    if (counts.size() <= value) counts.resize(value + 1, 0);
    counts[value] += times;
  }

  Pmf pmf() const {
    std::vector<double> w(counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j) w[j] = static_cast<double>(counts[j]);
    return Pmf::normalized(std::move(w));
  }

  double mean() const {
    double s = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) s += static_cast<double>(j) * static_cast<double>(counts[j]);
    return s / static_cast<double>(reps);
  }

  /// Unbiased sample variance.
  double variance() const {
    if (reps < 2) return 0.0;
    const double m = mean();
    double s = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      const double c = static_cast<double>(j) - m;
      s += c * c * static_cast<double>(counts[j]);
    }
    return s / static_cast<double>(reps - 1);
  }

  double mean_stderr() const { return std::sqrt(variance() / static_cast<double>(reps)); }

  /// Standard error of the sample variance, from the fourth central moment.
  double variance_stderr() const {
    const double m = mean(), v = variance();
    double m4 = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      const double c = static_cast<double>(j) - m;
      m4 += c * c * c * c * static_cast<double>(counts[j]);
    }
    m4 /= static_cast<double>(reps);
    return std::sqrt(std::max(0.0, m4 - v * v) / static_cast<double>(reps));
  }

  /// sqrt(support / reps): a conservative allowance for the TV fluctuation.
  double tv_stderr_proxy() const {
    return std::sqrt(static_cast<double>(counts.size()) / static_cast<double>(reps));
  }

  friend bool operator==(const EmpiricalLaw&, const EmpiricalLaw&) = default;
};

struct EmpiricalTv {
  double tv_hat;
  double slack;
};

inline EmpiricalTv empirical_tv(const EmpiricalLaw& e, const Pmf& target) {
  detail::require(e.reps >= 1, "reps", "must be at least 1");
  const std::size_t support = std::max(e.counts.size(), target.size());
  const double reps = static_cast<double>(e.reps);
  double s = 0.0;
  for (std::size_t j = 0; j < support; ++j) {
    const double hat = j < e.counts.size() ? static_cast<double>(e.counts[j]) / reps : 0.0;
    s += std::abs(hat - target[j]);
  }
  return {0.5 * s, std::sqrt(static_cast<double>(support) / reps)};
}

/// Runs `simulate(rng)` once per replicate, each with its own stream derived
/// from (seed, replicate index), and tallies the K returned outcomes into K
/// frequency tables. Replicates are split into contiguous blocks across at
/// most `threads` workers; the merged tables do not depend on `threads`.
template <std::size_t K, class Simulate>
std::array<EmpiricalLaw, K> run_replicates(std::uint64_t reps, std::uint64_t seed, unsigned threads,
                                           Simulate simulate) {
  detail::require(reps >= 1, "reps", "must be at least 1");
  const unsigned workers = static_cast<unsigned>(std::clamp<std::uint64_t>(threads == 0 ? 1 : threads, 1, reps));
  std::vector<std::array<EmpiricalLaw, K>> partial(workers);
  auto run_block = [&](unsigned w) {
    const std::uint64_t begin = reps * w / workers, end = reps * (w + 1) / workers;
    for (std::uint64_t r = begin; r < end; ++r) {
      Rng rng(seed, r);
      const std::array<std::size_t, K> out = simulate(rng);
      for (std::size_t k = 0; k < K; ++k) partial[w][k].add(out[k]);
    }
  };
  if (workers == 1) {
    run_block(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_block, w);
    for (auto& t : pool) t.join();
  }
  std::array<EmpiricalLaw, K> merged;
  for (std::size_t k = 0; k < K; ++k) {
    merged[k].reps = reps;
    merged[k].seed = seed;
    for (const auto& part : partial)
      for (std::size_t v = 0; v < part[k].counts.size(); ++v)
        if (part[k].counts[v] > 0) merged[k].add(v, part[k].counts[v]);
  }
  return merged;
}

}  // namespace steinlab
