// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "steinlab/steinlab.hpp"
#include "../test_support.hpp"

using namespace steinlab;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
  std::string report;  // Monte Carlo output, compared across thread counts

  void check(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::string fmt(double x) { return format_real(x); }

unsigned hw_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// 1 ------------------------------------------------------------------------
Verdict zip_exactness() {
  Verdict v;
  double worst = 0.0;
  for (double p : {0.5, 0.7, 0.9, 0.99})
    for (double lambda : {0.5, 1.0, 2.0, 5.0}) {
      const double target = (1 - p) * -std::expm1(-lambda);
      const double tv = tv_distance(zip_pmf(p, lambda), poisson_pmf(lambda)).value;
      const double mu = p * lambda, var = p * lambda + p * (1 - p) * lambda * lambda;
      const double pc = nd_condition_p(zip_coupling(p, lambda));
      const double b = bound_thm_i(mu, var, pc, lambda).total;
      worst = std::max({worst, std::abs(tv - target), std::abs(b - target)});
      v.check(std::abs(tv - target) <= 1e-10, "tv off at p=" + fmt(p) + " lambda=" + fmt(lambda));
      v.check(std::abs(b - target) <= 1e-10, "bound off at p=" + fmt(p) + " lambda=" + fmt(lambda));
    }
  if (v.pass) v.detail = "16 points, max deviation " + fmt(worst);
  return v;
}

// 2 ------------------------------------------------------------------------
Verdict reductions() {
  Verdict v;
  std::mt19937_64 gen(1002);
  std::uniform_real_distribution<double> u(0.05, 8.0);
  std::uniform_int_distribution<std::size_t> nn(20, 2000);
  double worst = 0.0;
  auto same = [&](double a, double b, const char* what) {
    worst = std::max(worst, std::abs(a - b));
    v.check(std::abs(a - b) <= 1e-12, what);
  };
  for (int i = 0; i < 100; ++i) {
    const double mu = u(gen), var = u(gen);
    const double classic = classic_bound(mu, var).total;
    same(bound_thm_i(mu, var, 1.0, mu).total, classic, "thm_i(p=1, lambda=mu) != classic");
    same(neg_assoc_bound(mu, var, 1.0).total, classic, "neg_assoc(p=1) != classic");

    const std::size_t n = nn(gen);
    const double lambda = std::min(u(gen), static_cast<double>(n) / 2.0);
    const double c = -std::expm1(-lambda), nd = static_cast<double>(n);
    // The contaminated forms with m = n written out term by term.
    const double ext2 = c * (var / lambda - 1 + 0.0 * (lambda + 1) + 2 * nd * lambda / (nd * nd));
    const double ext1 = c * (var / lambda - 1 + 2 * lambda / nd);
    same(extremes_bound(n, n, lambda, var).total, ext1, "extremes_bound(m=n) != uncontaminated form");
    same(ext2, ext1, "contaminated extremes form at m=n != uncontaminated form");
    const double unif2 = c * (4.0 / 3.0 * lambda * std::sqrt(2.0 / (nd * lambda)) + 2 * nd * lambda / (nd * nd));
    const double unif1 = c * (4.0 / 3.0 * std::sqrt(2 * lambda / nd) + 2 * lambda / nd);
    same(unif_window_bound(n, n, lambda, lambda, 0.0, 0.0).total, unif1, "unif_window_bound(m=n) != unif1");
    same(unif2, unif1, "contaminated window form at m=n != unif1");
  }
  if (v.pass) v.detail = "100 draws, max deviation " + fmt(worst);
  return v;
}

// 3 ------------------------------------------------------------------------
Verdict key_identity() {
  Verdict v;
  std::mt19937_64 gen(1003);
  std::uniform_real_distribution<double> lam(0.1, 15.0);
  double worst = 0.0;
  std::size_t solved = 0;
  for (int i = 0; i < 500; ++i) {
    const Pmf d = test::random_pmf(gen, 40, i % 2 == 0);
    const double lambda = lam(gen);
    const auto a = test::random_subset(gen, 45);
    double lhs = 0.0;
    for (std::size_t j : a) {
      if (j < d.size()) lhs += d[j];
      lhs -= std::exp(-lambda + static_cast<double>(j) * std::log(lambda) - std::lgamma(j + 1.0));
    }
    const double residual = std::abs(key_identity_rhs(d, lambda, a) - lhs);
    worst = std::max(worst, residual);
    v.check(residual <= 1e-9, "residual " + fmt(residual) + " on triple " + std::to_string(i));

    const auto s = solve_stein(lambda, a, std::max<std::size_t>(d.cap(), 45) + 1);
    ++solved;
    v.check(delta_g_sup(s) <= stein_factor(lambda) + 1e-12, "sup |Delta g| exceeds the Stein factor");
  }
  if (v.pass) v.detail = "500 triples, max residual " + fmt(worst) + ", Stein factor held on " + std::to_string(solved);
  return v;
}

// 4 ------------------------------------------------------------------------
Verdict sampling() {
  Verdict v;
  std::mt19937_64 gen(1004);
  std::uniform_int_distribution<std::size_t> nn(2, 12);
  double min_gap = 1e300;
  int binary_cases = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = nn(gen);
    const bool binary = i % 4 == 0;
    std::uniform_int_distribution<unsigned> val(0, binary ? 1 : 5);
    std::vector<unsigned> c(n);
    for (auto& x : c) x = val(gen);
    if (std::all_of(c.begin(), c.end(), [](unsigned x) { return x == 0; })) c[0] = 1;
    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, n - 1)(gen);
    const auto sb = sampling_bound(c, m);
    const Pmf w = sampling_exact(c, m);
    const auto tv = tv_distance(w, poisson_pmf(sb.mu));
    min_gap = std::min(min_gap, sb.bound.total - tv.value);
    v.check(tv.value <= sb.bound.total + 1e-9, "tv above bound on draw " + std::to_string(i));
    if (binary) {
      ++binary_cases;
      const double closed = -std::expm1(-sb.mu) * (1 - sb.var / sb.mu);
      v.check(std::abs(sb.bound.total - closed) <= 1e-12, "0/1 bound differs from closed form");
      v.check(stochastic_order_check(shift(w, 1), size_bias(w)).dominates, "W + 1 does not dominate W*");
    }
  }
  if (v.pass)
    v.detail = "200 draws (" + std::to_string(binary_cases) + " 0/1), min bound - tv " + fmt(min_gap);
  return v;
}

// 5 ------------------------------------------------------------------------
Verdict extremes(unsigned threads) {
  Verdict v;
  std::ostringstream report;
  double worst_ratio = 0.0;
  std::uint64_t seed = 5000;
  for (std::size_t n : {50, 100, 400})
    for (double lambda : {0.5, 1.0, 2.0}) {
      const auto full = extremes_exact_moments(n, n, lambda);
      const double lhs = full.var_w / lambda - 1, rhs = 4.0 / 3.0 * std::sqrt(2 * lambda / n);
      v.check(lhs < rhs, "variance inequality fails at n=" + std::to_string(n));
      const auto root = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
      for (std::size_t m : {n, n - root}) {
        const auto mom = extremes_exact_moments(n, m, lambda);
        const auto b = unif_window_bound(n, m, lambda, mom.mean_w, mom.mean_x, mom.var_x);
        const auto law = extremes_simulate(n, m, lambda, 100000, ++seed, threads);
        const auto tv = empirical_tv(law, poisson_pmf(lambda));
        worst_ratio = std::max(worst_ratio, tv.tv_hat / (b.total + 3 * tv.slack));
        v.check(tv.tv_hat <= b.total + 3 * tv.slack,
                "tv_hat " + fmt(tv.tv_hat) + " above bound at n=" + std::to_string(n) + " m=" + std::to_string(m));
        report << n << ' ' << m << ' ' << fmt(lambda) << ' ' << to_json(law).dump() << ' ' << fmt(tv.tv_hat) << '\n';
      }
    }
  v.report = report.str();
  if (v.pass) v.detail = "18 runs, max tv_hat/(bound+3 slack) " + fmt(worst_ratio);
  return v;
}

// 6 ------------------------------------------------------------------------
Verdict epidemic(unsigned threads) {
  Verdict v;
  std::ostringstream report, detail;
  struct Case {
    std::size_t n, d;
    double q;
  };
  std::uint64_t seed = 6000;
  for (auto c : {Case{100, 3, 0.99}, Case{200, 4, 0.995}}) {
    const auto mom = epidemic_moments_fixed_degree(c.n, c.d);
    const auto b = epidemic_bound(mom.ew, mom.var_w, c.q);
    const auto laws = epidemic_simulate(c.n, DegreeSpec::fixed(c.d), c.q, 100000, ++seed, threads);
    const auto& law = laws.isolated;
    const auto tv = empirical_tv(law, poisson_pmf(mom.ew));
    v.check(tv.tv_hat <= b.total + 3 * tv.slack, "tv_hat above bound at n=" + std::to_string(c.n));
    // The moment oracle against the simulated xi W.
    const double mean = c.q * mom.ew;
    const double var = c.q * mom.var_w + c.q * (1 - c.q) * mom.ew * mom.ew;
    v.check(std::abs(law.mean() - mean) <= 3 * law.mean_stderr(), "simulated mean off at n=" + std::to_string(c.n));
    v.check(std::abs(law.variance() - var) <= 3 * law.variance_stderr(),
            "simulated variance off at n=" + std::to_string(c.n));
    detail << "n=" << c.n << " tv_hat " << fmt(tv.tv_hat) << " <= " << fmt(b.total) << "; ";
    report << c.n << ' ' << to_json(law).dump() << ' ' << to_json(laws.susceptible).dump() << '\n';
  }
  // Qualitative decay in the binomial-degree mode at psi = 1, q = 1.
  std::vector<double> tvs;
  for (std::size_t n : {50, 400}) {
    const auto laws = epidemic_simulate(n, DegreeSpec::binomial(1.0), 1.0, 100000, ++seed, threads);
    tvs.push_back(empirical_tv(laws.susceptible, poisson_pmf(1.0)).tv_hat);
    report << n << ' ' << to_json(laws.susceptible).dump() << '\n';
  }
  v.check(tvs[1] < tvs[0], "no decay of tv_hat(|S_inf|, Po(1)) from n=50 to n=400");
  detail << "|S_inf| vs Po(1): " << fmt(tvs[0]) << " (n=50) -> " << fmt(tvs[1]) << " (n=400)";
  v.report = report.str();
  if (v.pass) v.detail = detail.str();
  return v;
}

// 7 ------------------------------------------------------------------------
Verdict poincare() {
  Verdict v;
  struct Law {
    std::string name;
    Pmf d;
    double p;
    std::function<double()> extra;  // family-specific bound, or nullptr
  };
  std::vector<Law> grid;
  for (double q : {0.05, 0.3, 0.5, 0.9}) grid.push_back({"Be(" + fmt(q) + ")", bernoulli(q), 0.0, nullptr});
  for (std::size_t n : {3, 10, 40})
    for (double q : {0.1, 0.5, 0.8})
      grid.push_back({"Bin(" + std::to_string(n) + "," + fmt(q) + ")", binomial(n, q), 0.0, nullptr});
  for (double lambda : {0.5, 1.0, 3.0, 10.0})
    grid.push_back({"Po(" + fmt(lambda) + ")", poisson_pmf(lambda, {1e-14}), 0.0, nullptr});
  for (double p : {0.5, 0.7, 0.9, 0.99})
    for (double lambda : {0.5, 1.0, 2.0, 5.0})
      grid.push_back({"ZIP(" + fmt(p) + "," + fmt(lambda) + ")", zip_pmf(p, lambda, {1e-14}),
                      nd_condition_p(zip_coupling(p, lambda, {1e-14})),
                      [p, lambda] { return zip_poincare_bound(p, lambda); }});

  std::size_t bounds_checked = 0;
  for (auto& law : grid) {
    const double p = law.p > 0.0 ? law.p : tail_ratio_p(law.d);
    const auto m = moments(law.d);
    const double r = poincare_oracle(law.d);
    // Truncated infinite laws: allow the truncation error amplified through the tail ratios.
    const double tol = 1e-8 * std::max(1.0, m.mean);
    v.check(m.variance <= r + tol, law.name + ": variance above oracle");
    if (p > 0.0) {
      ++bounds_checked;
      v.check(r <= poincare_bound(m.mean, p, failure_rate(law.d).h_star) + tol, law.name + ": above theorem bound");
    }
    const double c = c_log_concavity(law.d);
    if (c > 0.0 && std::isfinite(c)) {
      ++bounds_checked;
      v.check(r <= poincare_bound_logconcave(law.d) + tol, law.name + ": above log-concave bound");
    }
    if (law.extra) {
      ++bounds_checked;
      v.check(r <= law.extra() + tol, law.name + ": above ZIP bound");
    }
  }
  double worst_po = 0.0;
  for (double lambda : {1.0, 3.0, 10.0}) {
    const double r = poincare_oracle(poisson_pmf(lambda, {1e-14}));
    worst_po = std::max(worst_po, std::abs(r - lambda) / lambda);
    v.check(std::abs(r - lambda) <= 0.01 * lambda, "Poisson oracle off at " + fmt(lambda));
  }
  for (double q : {0.01, 0.25, 0.5, 0.75, 0.99})
    v.check(std::abs(poincare_oracle(bernoulli(q)) - q) <= 1e-8, "Bernoulli oracle off at " + fmt(q));
  if (v.pass)
    v.detail = std::to_string(grid.size()) + " laws, " + std::to_string(bounds_checked) +
               " bound comparisons, Poisson rel. error " + fmt(worst_po);
  return v;
}

// 8 ------------------------------------------------------------------------
Verdict lightbulb() {
  Verdict v;
  std::ostringstream detail;
  std::vector<double> dk0;
  for (std::size_t n : {10, 50, 100, 200, 400}) {
    const Pmf w = lightbulb_exact(n);
    const auto mw = moments(w);
    v.check(std::abs(mw.mean - n / 2.0) <= 1e-9, "mean != n/2 at n=" + std::to_string(n));
    for (auto [k, alpha] : {std::pair<std::size_t, double>{0, 0.0}, {25, 0.2}}) {
      const Pmf y = convolve(w, binomial(k, alpha));
      const auto my = moments(y);
      const double dk = kolmogorov_to_std_normal(y, my.mean, std::sqrt(my.variance));
      const double comp = lightbulb_composition(n, k, alpha, mw.variance).total;
      const double prop = lightbulb_bound(n, k, alpha, mw.variance).total;
      v.check(dk <= std::min(1.0, comp) + 1e-9, "d_K above composition at n=" + std::to_string(n));
      v.check(dk <= std::min(1.0, prop) + 1e-9, "d_K above proposition at n=" + std::to_string(n));
      if (k == 0 && n >= 100) dk0.push_back(dk);
    }
  }
  v.check(dk0.back() < dk0.front(), "d_K does not decrease from n=100 to n=400");
  detail << "d_K at k=0: " << fmt(dk0.front()) << " (n=100) -> " << fmt(dk0.back()) << " (n=400)";
  if (v.pass) v.detail = detail.str();
  return v;
}

struct Timed {
  Verdict v;
  double seconds;
};

Timed timed(const std::function<Verdict()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = f();
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail = std::string("exception: ") + e.what();
  }
  return {std::move(v), std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
}

bool emit(int id, const Timed& t, double limit) {
  const bool within = limit <= 0.0 || t.seconds < limit;
  const bool pass = t.v.pass && within;
  std::string detail = t.v.detail;
  if (t.v.pass && !within) detail += "; runtime limit exceeded";
  if (limit > 0.0)
    std::printf("criterion %d: %s  %s  [%.2f s, limit %.0f s]\n", id, pass ? "PASS" : "FAIL", detail.c_str(),
                t.seconds, limit);
  else
    std::printf("criterion %d: %s  %s  [%.2f s]\n", id, pass ? "PASS" : "FAIL", detail.c_str(), t.seconds);
  std::fflush(stdout);
  return pass;
}

}  // namespace

int main() {
  const unsigned a = hw_threads(), b = a + 2;
  bool all = true;
  all &= emit(1, timed(zip_exactness), 1);
  all &= emit(2, timed(reductions), 1);
  all &= emit(3, timed(key_identity), 5);
  all &= emit(4, timed(sampling), 10);
  const auto ext = timed([&] { return extremes(a); });
  all &= emit(5, ext, 120);
  const auto epi = timed([&] { return epidemic(a); });
  all &= emit(6, epi, 120);
  all &= emit(7, timed(poincare), 30);
  all &= emit(8, timed(lightbulb), 180);

  const auto repro = timed([&] {
    Verdict v;
    v.check(extremes(b).report == ext.v.report, "extremes report differs between thread counts");
    v.check(epidemic(b).report == epi.v.report, "epidemic report differs between thread counts");
    if (v.pass)
      v.detail = "criteria 5 and 6 re-run with " + std::to_string(b) + " threads (first run " + std::to_string(a) +
                 "): reports byte-identical";
    return v;
  });
  all &= emit(9, repro, 0);
  std::printf("%s\n", all ? "ALL PASS" : "SOME CRITERIA FAILED");
  return all ? 0 : 1;
}
