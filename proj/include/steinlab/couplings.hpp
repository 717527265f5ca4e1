#pragma once

// Joint laws of (Y, Y*) with an optional slack variable Z, and extraction of
// the largest p for which the relaxed monotonicity conditions
//
//   P(Y* <= Y + 1 | Y* >= x) >= p           (negative dependence)
//   P(Y* >= Y + 1 - Z | Y + 1 - Z >= x) >= p (positive dependence)
//
// hold for every x.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "steinlab/error.hpp"
#include "steinlab/pmf.hpp"

namespace steinlab {

/// Dense table P(Y = y, Y* = s), row-major with rows indexed by y.
class SizeBiasCoupling {
 public:
  SizeBiasCoupling(std::size_t rows, std::size_t cols, std::vector<double> joint)
      : rows_(rows), cols_(cols), joint_(std::move(joint)) {
    detail::require(rows > 0 && cols > 0, "joint", "empty table");
    detail::require(joint_.size() == rows * cols, "joint", "dimension mismatch");
    for (double v : joint_)
      detail::require(std::isfinite(v) && v >= 0.0, "joint", "entries must be finite and >= 0");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t y, std::size_t s) const { return joint_[y * cols_ + s]; }
  double& at(std::size_t y, std::size_t s) { return joint_[y * cols_ + s]; }

  std::vector<double> row_sums() const {
    std::vector<double> r(rows_, 0.0);
    for (std::size_t y = 0; y < rows_; ++y)
      for (std::size_t s = 0; s < cols_; ++s) r[y] += (*this)(y, s);
    return r;
  }

  std::vector<double> col_sums() const {
    std::vector<double> c(cols_, 0.0);
    for (std::size_t y = 0; y < rows_; ++y)
      for (std::size_t s = 0; s < cols_; ++s) c[s] += (*this)(y, s);
    return c;
  }

  /// Attaches the conditional law of Z given each cell. `z_given[y * cols + s]`
  /// must sum to one wherever the cell carries mass; it may be empty otherwise.
  void set_z_given(std::vector<std::vector<double>> z_given) {
    detail::require(z_given.size() == rows_ * cols_, "z_given", "dimension mismatch");
    for (std::size_t i = 0; i < z_given.size(); ++i) {
      const auto& v = z_given[i];
      double sum = 0.0;
      for (double m : v) {
        detail::require(std::isfinite(m) && m >= 0.0, "z_given", "masses must be finite and >= 0");
        sum += m;
      }
      if (joint_[i] > 0.0)
        detail::require(std::abs(sum - 1.0) <= 1e-10, "z_given", "conditional law must sum to 1");
    }
    z_given_ = std::move(z_given);
  }

  bool has_z() const noexcept { return z_given_.has_value(); }
  const std::vector<double>& z_given(std::size_t y, std::size_t s) const { return (*z_given_)[y * cols_ + s]; }

 private:
  std::size_t rows_, cols_;
  std::vector<double> joint_;
  std::optional<std::vector<std::vector<double>>> z_given_;
};

struct CouplingReport {
  double marginal_tv;   // rows vs base
  double size_bias_tv;  // columns vs size_bias(base)
  bool passed;
};

struct PdCondition {
  double p_max;
  double mean_z;
};

namespace detail {

inline double half_l1(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::max(a.size(), b.size());
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = j < a.size() ? a[j] : 0.0, y = j < b.size() ? b[j] : 0.0;
    s += std::abs(x - y);
  }
  return 0.5 * s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Constructors

/// Product measure of base and its size-biased law.
inline SizeBiasCoupling independent_coupling(const Pmf& base) {
  const Pmf star = size_bias(base);
  SizeBiasCoupling c(base.size(), star.size(), std::vector<double>(base.size() * star.size()));
  for (std::size_t y = 0; y < base.size(); ++y)
    for (std::size_t s = 0; s < star.size(); ++s) c.at(y, s) = base[y] * star[s];
  return c;
}

/// Y* = Y + 1. A valid size-bias coupling only when size_bias(base) is the
/// unit shift of base, i.e. for Poisson laws.
inline SizeBiasCoupling unit_shift_coupling(const Pmf& base) {
  SizeBiasCoupling c(base.size(), base.size() + 1, std::vector<double>(base.size() * (base.size() + 1)));
  for (std::size_t y = 0; y < base.size(); ++y) c.at(y, y + 1) = base[y];
  return c;
}

/// Attaches Z = z (deterministic) to every cell.
inline SizeBiasCoupling with_constant_z(SizeBiasCoupling c, std::size_t z) {
  std::vector<double> point(z + 1, 0.0);
  point[z] = 1.0;
  c.set_z_given(std::vector<std::vector<double>>(c.rows() * c.cols(), point));
  return c;
}

/// Y = I_p Z, Y* = Z + 1 with Z ~ Po(lambda) and I_p ~ Be(p) independent.
inline SizeBiasCoupling zip_coupling(double p, double lambda, TruncationPolicy policy = {}) {
  detail::require(p > 0.0 && p <= 1.0, "p", "must lie in (0, 1]");
  const Pmf po = poisson_pmf(lambda, policy);
  const std::size_t n = po.size();
  SizeBiasCoupling c(n, n + 1, std::vector<double>(n * (n + 1), 0.0));
  for (std::size_t z = 0; z < n; ++z) {
    c.at(z, z + 1) += p * po[z];
    c.at(0, z + 1) += (1.0 - p) * po[z];
  }
  return c;
}

// ---------------------------------------------------------------------------
// Queries

inline CouplingReport validate_coupling(const SizeBiasCoupling& c, const Pmf& base) {
  const auto rows = c.row_sums();
  const auto cols = c.col_sums();
  const Pmf star = size_bias(base);
  const double tv_rows = detail::half_l1(rows, base.probs());
  const double tv_cols = detail::half_l1(cols, star.probs());
  return {tv_rows, tv_cols, tv_rows <= 1e-10 && tv_cols <= 1e-10};
}

/// min over x with P(Y* >= x) > 0 of P(Y* <= Y + 1 | Y* >= x).
inline double nd_condition_p(const SizeBiasCoupling& c) {
  const std::size_t n = c.cols();
  std::vector<double> all(n, 0.0), good(n, 0.0);  // by value of Y*
  for (std::size_t y = 0; y < c.rows(); ++y)
    for (std::size_t s = 0; s < n; ++s) {
      all[s] += c(y, s);
      if (s <= y + 1) good[s] += c(y, s);
    }
  double p = 1.0, tail_all = 0.0, tail_good = 0.0;
  for (std::size_t x = n; x-- > 0;) {
    tail_all += all[x];
    tail_good += good[x];
    if (tail_all > 0.0) p = std::min(p, tail_good / tail_all);
  }
  return std::clamp(p, 0.0, 1.0);
}

/// min over x with P(Y + 1 - Z >= x) > 0 of P(Y* >= Y + 1 - Z | Y + 1 - Z >= x),
/// together with E Z.
inline PdCondition pd_condition_p(const SizeBiasCoupling& c) {
  detail::require(c.has_z(), "coupling", "positive-dependence condition needs the law of Z");
  std::size_t z_max = 0;
  for (std::size_t y = 0; y < c.rows(); ++y)
    for (std::size_t s = 0; s < c.cols(); ++s)
      if (c(y, s) > 0.0) z_max = std::max(z_max, c.z_given(y, s).size());
  // V = Y + 1 - Z ranges over [1 - z_max, rows]; store with offset z_max.
  const std::size_t span = c.rows() + z_max + 1;
  std::vector<double> all(span, 0.0), good(span, 0.0);
  double mean_z = 0.0;
  for (std::size_t y = 0; y < c.rows(); ++y)
    for (std::size_t s = 0; s < c.cols(); ++s) {
      const double w = c(y, s);
      if (w == 0.0) continue;
      const auto& zl = c.z_given(y, s);
      for (std::size_t z = 0; z < zl.size(); ++z) {
        const double m = w * zl[z];
        if (m == 0.0) continue;
        mean_z += m * static_cast<double>(z);
        const long v = static_cast<long>(y) + 1 - static_cast<long>(z);
        const auto idx = static_cast<std::size_t>(v + static_cast<long>(z_max));
        all[idx] += m;
        if (static_cast<long>(s) >= v) good[idx] += m;
      }
    }
  double p = 1.0, tail_all = 0.0, tail_good = 0.0;
  for (std::size_t x = span; x-- > 0;) {
    tail_all += all[x];
    tail_good += good[x];
    if (tail_all > 0.0) p = std::min(p, tail_good / tail_all);
  }
  return {std::clamp(p, 0.0, 1.0), mean_z};
}

/// Largest p in [0, 1] with p P(Y* >= k + 1) <= P(Y >= k) for all k, i.e.
/// I_p Y* <=_st Y + 1, computed from the marginal alone.
inline double tail_ratio_p(const Pmf& d) {
  const Pmf star = size_bias(d);
  const std::size_t n = std::max(d.size(), star.size()) + 1;
  const auto ty = upper_tails(d, n + 1), ts = upper_tails(star, n + 1);
  double p = 1.0;
  for (std::size_t k = 0; k < n; ++k)
    if (ts[k + 1] > 0.0) p = std::min(p, ty[k] / ts[k + 1]);
  return p;
}

/// Admissible p for Y = xi W + X with xi ~ Be(q), E W = nu, E X = phi.
inline double contaminated_p(double q, double nu, double phi) {
  detail::require(q > 0.0 && q <= 1.0, "q", "must lie in (0, 1]");
  detail::require(nu > 0.0, "nu", "must be positive");
  detail::require(phi >= 0.0, "phi", "must be non-negative");
  return q * q * nu / (q * nu + phi);
}

/// Law of Y* for Y = xi W + X: with probability q nu / (q nu + phi) the law of
/// W* + X, otherwise the law of xi W + X*.
inline Pmf mixture_size_bias(double q, const Pmf& w, const Pmf& x) {
  detail::require(q >= 0.0 && q <= 1.0, "q", "must lie in [0, 1]");
  const double qnu = q * moments(w).mean;
  const double phi = moments(x).mean;
  detail::require(qnu > 0.0 || phi > 0.0, "w, x", "both summands have mean zero");
  const double weight = qnu / (qnu + phi);
  if (phi == 0.0) return convolve(size_bias(w), x);
  if (qnu == 0.0) return convolve(bernoulli_thin(w, q), size_bias(x));
  return mixture(weight, convolve(size_bias(w), x), convolve(bernoulli_thin(w, q), size_bias(x)));
}

}  // namespace steinlab
