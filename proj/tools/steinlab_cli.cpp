// steinlab: compute bounds, run exact oracles and simulations, and check
// bounds against oracles from the command line.
//
//   steinlab <bound|oracle|simulate|verify> <model> [model options] [global options]
//
// Exit codes: 0 success / pass, 1 verification failure, 2 invalid input.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "steinlab/steinlab.hpp"

using namespace steinlab;

namespace {

constexpr double kExactSlack = 1e-9;
constexpr double kMcSigmas = 3.0;
constexpr double kPoincareTail = 1e-10;

struct Options {
  std::string command, model;
  // model parameters
  double p = 0, lambda = 0, q = 1, psi = 1, alpha = 0, bound_lambda = 0, bound_p = 0, tau_sq = 0;
  std::size_t n = 0, m = 0, d = 0, k = 0;
  std::string values, dist;
  bool tau_approx = false;
  // global
  std::uint64_t seed = 1, reps = 100000;
  std::string format = "json", output;
  unsigned threads = 0;

  CLI::App* sub = nullptr;
  bool has(const std::string& flag) const { return sub->count("--" + flag) > 0; }
};

struct Outcome {
  Json report;
  bool pass = true;
};

[[noreturn]] void missing(const char* name) { throw InputError(name, "required for this model"); }

double need(const Options& o, const char* name, double v) {
  if (!o.has(name)) missing(name);
  return v;
}
std::size_t need(const Options& o, const char* name, std::size_t v) {
  if (!o.has(name)) missing(name);
  return v;
}

void reject_overrides(const Options& o) {
  if (o.has("bound-lambda")) throw InputError("bound-lambda", "not supported for this model");
  if (o.has("bound-p")) throw InputError("bound-p", "not supported for this model");
}

std::vector<unsigned> parse_values(const Options& o) {
  if (!o.has("values")) missing("values");
  std::vector<unsigned> out;
  std::stringstream ss(o.values);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    long v = -1;
    try {
      v = std::stol(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v < 0 || v > 1'000'000) throw InputError("values", "expected non-negative integers");
    out.push_back(static_cast<unsigned>(v));
  }
  return out;
}

Json header(const Options& o, Json params) {
  return Json{{"command", o.command}, {"model", o.model}, {"params", std::move(params)}};
}

Json pmf_summary(const Pmf& d) {
  const auto mom = moments(d);
  return Json{{"mean", real(mom.mean)}, {"var", real(mom.variance)}};
}

Json mc_block(const EmpiricalLaw& law, const Pmf& target, const std::string& target_label) {
  const auto tv = empirical_tv(law, target);
  return Json{{"law", to_json(law)},
              {"mean", real(law.mean())},
              {"var", real(law.variance())},
              {"mean_stderr", real(law.mean_stderr())},
              {"target", target_label},
              {"tv_hat", real(tv.tv_hat)},
              {"slack", real(kMcSigmas * tv.slack)}};
}

std::string po_label(double lambda) { return "Po(" + format_real(lambda) + ")"; }

// ---------------------------------------------------------------------------
// zip

struct ZipSetup {
  double p, lambda, mu, var, p_coupling, lambda_used, p_used;
};

ZipSetup zip_setup(const Options& o) {
  ZipSetup s{};
  s.p = need(o, "p", o.p);
  s.lambda = need(o, "lambda", o.lambda);
  validate(ZipModel{s.p, s.lambda});
  s.mu = s.p * s.lambda;
  s.var = s.p * s.lambda + s.p * (1 - s.p) * s.lambda * s.lambda;
  s.p_coupling = nd_condition_p(zip_coupling(s.p, s.lambda));
  s.lambda_used = o.has("bound-lambda") ? o.bound_lambda : s.lambda;
  s.p_used = s.p_coupling;
  if (o.has("bound-p")) {
    detail::require(o.bound_p >= 0.0 && o.bound_p <= 1.0, "bound-p", "must lie in [0, 1]");
    s.p_used = o.bound_p;
  }
  return s;
}

Json zip_params(const ZipSetup& s) { return Json{{"p", real(s.p)}, {"lambda", real(s.lambda)}}; }

Outcome run_zip(const Options& o) {
  const auto s = zip_setup(o);
  Json r = header(o, zip_params(s));
  const auto bound = bound_thm_i(s.mu, s.var, s.p_used, s.lambda_used);
  if (o.command == "bound") {
    r["mu"] = real(s.mu);
    r["var"] = real(s.var);
    r["p_coupling"] = real(s.p_coupling);
    r["p_admissible"] = s.p_used <= s.p_coupling + 1e-12;
    r["bound"] = to_json(bound);
    return {r};
  }
  if (o.command == "simulate") {
    reject_overrides(o);
    const auto law = zip_simulate(s.p, s.lambda, o.reps, o.seed, o.threads);
    r["seed"] = o.seed;
    r["reps"] = o.reps;
    r.update(mc_block(law, poisson_pmf(s.lambda), po_label(s.lambda)));
    return {r};
  }
  const auto tv = tv_distance(zip_pmf(s.p, s.lambda), poisson_pmf(s.lambda_used));
  if (o.command == "oracle") {
    r["tv"] = real(tv.value);
    r["truncation_error"] = real(tv.error_bound);
    return {r};
  }
  const double slack = kExactSlack + tv.error_bound;
  const bool pass = tv.value <= bound.total + slack;
  r["p_admissible"] = s.p_used <= s.p_coupling + 1e-12;
  r["bound"] = real(bound.total);
  r["oracle"] = real(tv.value);
  r["slack"] = real(slack);
  r["pass"] = pass;
  return {r, pass};
}

// ---------------------------------------------------------------------------
// sampling

Outcome run_sampling(const Options& o) {
  const auto values = parse_values(o);
  const std::size_t m = need(o, "m", o.m);
  validate(SamplingModel{values, m});
  Json params{{"values", values}, {"m", m}};
  Json r = header(o, params);
  const auto s = sampling_bound(values, m);
  double p_used = s.p;
  if (o.has("bound-p")) {
    detail::require(o.bound_p >= 0.0 && o.bound_p <= 1.0, "bound-p", "must lie in [0, 1]");
    p_used = o.bound_p;
  }
  const auto bound = o.has("bound-lambda") ? bound_thm_i(s.mu, s.var, p_used, o.bound_lambda)
                                           : neg_assoc_bound(s.mu, s.var, p_used);
  const double lambda_used = bound.lambda_used;
  if (o.command == "bound") {
    r["mu"] = real(s.mu);
    r["var"] = real(s.var);
    r["p"] = real(s.p);
    r["p_admissible"] = p_used <= s.p + 1e-12;
    r["bound"] = to_json(bound);
    return {r};
  }
  if (o.command == "simulate") throw InputError("model", "sampling has an exact law; use oracle");
  const Pmf exact = sampling_exact(values, m);
  const auto tv = tv_distance(exact, poisson_pmf(lambda_used));
  if (o.command == "oracle") {
    r["pmf"] = to_json(exact);
    r.update(pmf_summary(exact));
    r["tv"] = real(tv.value);
    r["truncation_error"] = real(tv.error_bound);
    return {r};
  }
  const double slack = kExactSlack + tv.error_bound;
  const bool pass = tv.value <= bound.total + slack;
  r["p_admissible"] = p_used <= s.p + 1e-12;
  r["bound"] = real(bound.total);
  r["oracle"] = real(tv.value);
  r["slack"] = real(slack);
  r["pass"] = pass;
  return {r, pass};
}

// ---------------------------------------------------------------------------
// epidemic

Outcome run_epidemic(const Options& o) {
  reject_overrides(o);
  const std::size_t n = need(o, "n", o.n);
  const bool fixed = o.has("d");
  if (fixed && o.has("psi")) throw InputError("psi", "give either --d or --psi, not both");
  const DegreeSpec deg = fixed ? DegreeSpec::fixed(o.d) : DegreeSpec::binomial(o.psi);
  validate(EpidemicModel{n, deg, o.q});
  Json params{{"n", n}};
  if (fixed)
    params["d"] = o.d;
  else
    params["psi"] = real(o.psi);
  params["q"] = real(o.q);
  Json r = header(o, params);

  if (o.command == "simulate") {
    const auto laws = epidemic_simulate(n, deg, o.q, o.reps, o.seed, o.threads);
    double lambda_w, lambda_s;
    if (fixed) {
      lambda_w = lambda_s = epidemic_moments_fixed_degree(n, o.d).ew;
    } else {
      const double nd = static_cast<double>(n), rr = o.psi * std::log(nd) / (nd - 1.0);
      lambda_w = nd * std::pow(1.0 - rr, nd - 1.0);
      lambda_s = std::pow(nd, 1.0 - o.psi);
    }
    r["seed"] = o.seed;
    r["reps"] = o.reps;
    r["isolated"] = mc_block(laws.isolated, poisson_pmf(lambda_w), po_label(lambda_w));
    r["susceptible"] = mc_block(laws.susceptible, poisson_pmf(lambda_s), po_label(lambda_s));
    return {r};
  }
  if (!fixed) throw InputError("d", "closed-form moments need fixed degrees");
  const auto mom = epidemic_moments_fixed_degree(n, o.d);
  const auto bound = epidemic_bound(mom.ew, mom.var_w, o.q);
  if (o.command == "bound") {
    r["Lambda"] = real(mom.ew);
    r["var_w"] = real(mom.var_w);
    r["bound"] = to_json(bound);
    return {r};
  }
  if (o.command == "oracle") {
    r["Lambda"] = real(mom.ew);
    r["var_w"] = real(mom.var_w);
    return {r};
  }
  const auto laws = epidemic_simulate(n, deg, o.q, o.reps, o.seed, o.threads);
  const auto tv = empirical_tv(laws.isolated, poisson_pmf(mom.ew));
  // The moment oracle itself is checked against the simulated W (q = 1 part).
  const double slack = kMcSigmas * tv.slack;
  const bool pass = tv.tv_hat <= bound.total + slack;
  r["seed"] = o.seed;
  r["reps"] = o.reps;
  r["Lambda"] = real(mom.ew);
  r["var_w"] = real(mom.var_w);
  r["bound"] = real(bound.total);
  r["oracle"] = real(tv.tv_hat);
  r["slack"] = real(slack);
  r["pass"] = pass;
  return {r, pass};
}

// ---------------------------------------------------------------------------
// extremes

Outcome run_extremes(const Options& o) {
  reject_overrides(o);
  const std::size_t n = need(o, "n", o.n);
  const double lambda = need(o, "lambda", o.lambda);
  const std::size_t m = o.has("m") ? o.m : n;
  validate(ExtremesModel{n, m, lambda});
  Json r = header(o, Json{{"n", n}, {"m", m}, {"lambda", real(lambda)}});
  const auto mom = extremes_exact_moments(n, m, lambda);
  const auto ext = extremes_bound(n, m, lambda, mom.var);
  const auto unif = unif_window_bound(n, m, lambda, mom.mean_w, mom.mean_x, mom.var_x);
  if (o.command == "bound") {
    r["mean"] = real(mom.mean);
    r["var"] = real(mom.var);
    r["bounds"] = Json{{"extremes", to_json(ext)}, {"unif_window", to_json(unif)}};
    return {r};
  }
  if (o.command == "oracle") {
    r["mean"] = real(mom.mean);
    r["var"] = real(mom.var);
    r["var_w"] = real(mom.var_w);
    r["var_x"] = real(mom.var_x);
    return {r};
  }
  const auto law = extremes_simulate(n, m, lambda, o.reps, o.seed, o.threads);
  r["seed"] = o.seed;
  r["reps"] = o.reps;
  if (o.command == "simulate") {
    r.update(mc_block(law, poisson_pmf(lambda), po_label(lambda)));
    return {r};
  }
  const auto tv = empirical_tv(law, poisson_pmf(lambda));
  const double slack = kMcSigmas * tv.slack;
  const bool pass = tv.tv_hat <= unif.total + slack;
  r["bound"] = real(unif.total);
  r["bound_extremes"] = real(ext.total);
  r["oracle"] = real(tv.tv_hat);
  r["slack"] = real(slack);
  r["pass"] = pass;
  return {r, pass};
}

// ---------------------------------------------------------------------------
// lightbulb

Outcome run_lightbulb(const Options& o) {
  reject_overrides(o);
  const std::size_t n = need(o, "n", o.n);
  validate(LightbulbModel{n});
  Json r = header(o, Json{{"n", n}, {"k", o.k}, {"alpha", real(o.alpha)}});
  if (o.command == "simulate") {
    const auto law = lightbulb_simulate(n, o.reps, o.seed, o.threads);
    r["seed"] = o.seed;
    r["reps"] = o.reps;
    r.update(mc_block(law, lightbulb_exact(n), "exact"));
    return {r};
  }
  const Pmf w = lightbulb_exact(n);
  double tau_sq = moments(w).variance;
  if (o.tau_approx) tau_sq = static_cast<double>(n) / 4.0;
  if (o.has("tau-sq")) tau_sq = o.tau_sq;
  const Pmf y = convolve(w, binomial(o.k, o.alpha));
  const auto ym = moments(y);
  detail::require(ym.variance > 0.0, "n", "W + X is degenerate; the normal bound needs positive variance");
  const double dk = kolmogorov_to_std_normal(y, ym.mean, std::sqrt(ym.variance));
  if (o.command == "oracle") {
    r["mean_w"] = real(moments(w).mean);
    r["var_w"] = real(moments(w).variance);
    r["mean"] = real(ym.mean);
    r["var"] = real(ym.variance);
    r["d_k"] = real(dk);
    return {r};
  }
  const auto prop = lightbulb_bound(n, o.k, o.alpha, tau_sq);
  const auto comp = lightbulb_composition(n, o.k, o.alpha, tau_sq);
  if (o.command == "bound") {
    r["tau_sq"] = real(tau_sq);
    r["sigma_sq"] = real(tau_sq + o.alpha * (1 - o.alpha) * static_cast<double>(o.k));
    r["proposition"] = to_json(prop);
    r["composition"] = to_json(comp);
    return {r};
  }
  const bool pass = dk <= std::min(1.0, prop.total) + kExactSlack && dk <= std::min(1.0, comp.total) + kExactSlack;
  r["bound"] = real(std::min(prop.total, comp.total));
  r["bound_proposition"] = real(prop.total);
  r["bound_composition"] = real(comp.total);
  r["oracle"] = real(dk);
  r["slack"] = real(kExactSlack);
  r["pass"] = pass;
  return {r, pass};
}

// ---------------------------------------------------------------------------
// poincare

Outcome run_poincare(const Options& o) {
  reject_overrides(o);
  if (!o.has("dist")) missing("dist");
  Pmf law;
  double p_used = 1.0;
  std::optional<double> zip_bound;
  Json params{{"dist", o.dist}};
  if (o.dist == "poisson") {
    const double lambda = need(o, "lambda", o.lambda);
    detail::require(lambda > 0.0, "lambda", "must be positive");
    params["lambda"] = real(lambda);
    law = poisson_pmf(lambda, {kPoincareTail});
    p_used = tail_ratio_p(law);
  } else if (o.dist == "zip") {
    const double p = need(o, "p", o.p), lambda = need(o, "lambda", o.lambda);
    params["p"] = real(p);
    params["lambda"] = real(lambda);
    law = zip_pmf(p, lambda, {kPoincareTail});
    p_used = nd_condition_p(zip_coupling(p, lambda, {kPoincareTail}));
    zip_bound = zip_poincare_bound(p, lambda);
  } else if (o.dist == "binomial") {
    const std::size_t n = need(o, "n", o.n);
    detail::require(o.q > 0.0 && o.q < 1.0, "q", "must lie in (0, 1)");
    detail::require(n >= 1, "n", "must be at least 1");
    params["n"] = n;
    params["q"] = real(o.q);
    law = binomial(n, o.q);
    p_used = tail_ratio_p(law);
  } else if (o.dist == "bernoulli") {
    detail::require(o.q > 0.0 && o.q < 1.0, "q", "must lie in (0, 1)");
    params["q"] = real(o.q);
    law = bernoulli(o.q);
    p_used = tail_ratio_p(law);
  } else {
    throw InputError("dist", "must be one of poisson, zip, binomial, bernoulli");
  }
  Json r = header(o, params);
  if (o.command == "simulate") throw InputError("model", "poincare has no simulator");
  detail::require(p_used > 0.0, "p", "no admissible p > 0 for this law");
  const auto res = assess_poincare(law, p_used);
  const double c = c_log_concavity(law);
  std::optional<double> lc;
  if (c > 0.0 && std::isfinite(c)) lc = poincare_bound_logconcave(law);
  Json bounds{{"theorem", real(res.bound)},
              {"logconcave", lc ? real(*lc) : Json(nullptr)},
              {"zip", zip_bound ? real(*zip_bound) : Json(nullptr)}};
  if (o.command == "oracle") {
    r.update(to_json(res));
    return {r};
  }
  if (o.command == "bound") {
    r["mu"] = real(moments(law).mean);
    r["lower_bound_var"] = real(res.lower_bound_var);
    r["p_used"] = real(p_used);
    r["h_star"] = real(res.h_star);
    r["bounds"] = bounds;
    return {r};
  }
  const double oracle = *res.oracle;
  double best = res.bound;
  if (lc) best = std::min(best, *lc);
  if (zip_bound) best = std::min(best, *zip_bound);
  const bool pass = res.lower_bound_var <= oracle + kExactSlack && oracle <= best + kExactSlack;
  r["bound"] = real(best);
  r["bounds"] = bounds;
  r["lower_bound_var"] = real(res.lower_bound_var);
  r["oracle"] = real(oracle);
  r["slack"] = real(kExactSlack);
  r["truncated"] = res.truncated;
  r["pass"] = pass;
  return {r, pass};
}

Outcome dispatch(const Options& o) {
  static const std::map<std::string, Outcome (*)(const Options&)> models{
      {"zip", run_zip},           {"sampling", run_sampling},   {"epidemic", run_epidemic},
      {"extremes", run_extremes}, {"lightbulb", run_lightbulb}, {"poincare", run_poincare}};
  const auto it = models.find(o.model);
  if (it == models.end()) throw InputError("model", "unknown model '" + o.model + "'");
  return it->second(o);
}

// Flattens a report into "field,value" rows.
void flatten(const Json& j, const std::string& prefix, std::ostream& os) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), os);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), os);
  } else if (j.is_string()) {
    os << prefix << ',' << j.get<std::string>() << '\n';
  } else {
    os << prefix << ',' << j.dump() << '\n';
  }
}

std::string render(const Json& report, const std::string& format) {
  if (format == "csv") {
    std::ostringstream os;
    os << "field,value\n";
    flatten(report, "", os);
    return os.str();
  }
  return report.dump(2) + "\n";
}

void add_model_options(CLI::App* sub, Options& o) {
  sub->add_option("model", o.model, "zip | sampling | epidemic | extremes | lightbulb | poincare")->required();
  sub->add_option("--p", o.p, "mixing probability (zip)");
  sub->add_option("--lambda", o.lambda, "Poisson mean / threshold calibration");
  sub->add_option("--q", o.q, "catastrophe-free probability (epidemic) or success probability");
  sub->add_option("--psi", o.psi, "binomial-degree exponent in (1/2, 1] (epidemic)");
  sub->add_option("--alpha", o.alpha, "contamination success probability (lightbulb)");
  sub->add_option("--n", o.n, "population / sequence length / bulbs");
  sub->add_option("--m", o.m, "sample size or associated-block length");
  sub->add_option("--d", o.d, "fixed out-degree (epidemic)");
  sub->add_option("--k", o.k, "contamination trials (lightbulb)");
  sub->add_option("--values", o.values, "comma-separated non-negative integers (sampling)");
  sub->add_option("--dist", o.dist, "poisson | zip | binomial | bernoulli (poincare)");
  sub->add_option("--tau-sq", o.tau_sq, "override Var W (lightbulb)");
  sub->add_flag("--tau-approx", o.tau_approx, "use Var W = n/4 instead of the exact value (lightbulb)");
  sub->add_option("--bound-lambda", o.bound_lambda, "override the Poisson mean used by the bound");
  sub->add_option("--bound-p", o.bound_p, "override p; the report flags values above the admissible one");
}

unsigned default_threads() {
  if (const char* env = std::getenv("STEINLAB_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<unsigned>(v);
    throw InputError("STEINLAB_THREADS", "must be an integer in [1, 1024]");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Poisson and normal approximation bounds with exact and Monte Carlo oracles"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", o.seed, "64-bit seed for Monte Carlo runs");
  app.add_option("--reps", o.reps, "Monte Carlo replicates")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40));
  app.add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--output", o.output, "write the report here instead of stdout");
  auto* threads_opt = app.add_option("--threads", o.threads, "worker cap; results do not depend on it")
                          ->check(CLI::Range(1u, 1024u));

  const std::pair<const char*, const char*> commands[] = {
      {"bound", "evaluate the bound for a model"},
      {"oracle", "evaluate the exact oracle for a model"},
      {"simulate", "run the seeded simulator for a model"},
      {"verify", "compare bound against oracle; exit 1 on failure"}};
  for (auto [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_model_options(sub, o);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (auto* sub : app.get_subcommands()) {
      o.command = sub->get_name();
      o.sub = sub;
    }
    if (threads_opt->count() == 0) o.threads = default_threads();
    const Outcome out = dispatch(o);
    const std::string text = render(out.report, o.format);
    if (o.output.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(o.output, std::ios::binary);
      if (!f) {
        std::cerr << "error: parameter 'output': cannot open " << o.output << "\n";
        return 2;
      }
      f << text;
    }
    return out.pass ? 0 : 1;
  } catch (const InputError& e) {
    std::cerr << "error: invalid parameter " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
