#pragma once

// JSON and CSV encodings. Object keys keep a fixed order and every real is
// rounded to 12 significant digits so identical inputs give identical bytes.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "steinlab/couplings.hpp"
#include "steinlab/empirical.hpp"
#include "steinlab/poincare.hpp"
#include "steinlab/poisson_bounds.hpp"

namespace steinlab {

using Json = nlohmann::ordered_json;

/// Rounds to 12 significant digits (round-to-nearest, ties to even on the
/// binary value). Non-finite values become JSON null.
inline Json real(double x) {
  if (!std::isfinite(x)) return nullptr;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  double r = std::strtod(buf, nullptr);
  if (r == 0.0) r = 0.0;  // drop negative zero
  return r;
}

inline std::string format_real(double x) {
  if (!std::isfinite(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline Json to_json(const BoundBreakdown& b) {
  Json terms = Json::array();
  for (const auto& t : b.terms) terms.push_back(Json{{"label", t.label}, {"value", real(t.value)}});
  return Json{{"terms", terms},
              {"total", real(b.total)},
              {"lambda_used", real(b.lambda_used)},
              {"p_used", real(b.p_used)},
              {"vacuous", b.vacuous()}};
}

inline Json to_json(const Pmf& d) {
  Json a = Json::array();
  for (double p : d.probs()) a.push_back(real(p));
  return a;
}

inline Json to_json(const EmpiricalLaw& e) {
  return Json{{"counts", e.counts}, {"reps", e.reps}, {"seed", e.seed}};
}

inline EmpiricalLaw empirical_from_json(const Json& j) {
  EmpiricalLaw e;
  e.counts = j.at("counts").get<std::vector<std::uint64_t>>();
  e.reps = j.at("reps").get<std::uint64_t>();
  e.seed = j.at("seed").get<std::uint64_t>();
  std::uint64_t sum = 0;
  for (auto c : e.counts) sum += c;
  detail::require(sum == e.reps, "counts", "counts must sum to reps");
  return e;
}

inline Json to_json(const PoincareResult& r) {
  return Json{{"bound", real(r.bound)},
              {"oracle", r.oracle ? real(*r.oracle) : Json(nullptr)},
              {"lower_bound_var", real(r.lower_bound_var)},
              {"p_used", real(r.p_used)},
              {"h_star", real(r.h_star)},
              {"truncated", r.truncated}};
}

/// {"joint": [[...], ...], "z_given": [[y, s, [masses...]], ...]}; z_given
/// is optional and lists only the cells that carry mass.
inline SizeBiasCoupling coupling_from_json(const Json& j) {
  const auto& rows = j.at("joint");
  detail::require(rows.is_array() && !rows.empty(), "joint", "must be a non-empty matrix");
  const std::size_t r = rows.size(), c = rows[0].size();
  std::vector<double> flat;
  flat.reserve(r * c);
  for (const auto& row : rows) {
    detail::require(row.size() == c, "joint", "ragged matrix");
    for (const auto& v : row) flat.push_back(v.get<double>());
  }
  SizeBiasCoupling out(r, c, std::move(flat));
  if (j.contains("z_given")) {
    std::vector<std::vector<double>> zg(r * c);
    for (const auto& cell : j.at("z_given")) {
      const auto y = cell.at(0).get<std::size_t>(), s = cell.at(1).get<std::size_t>();
      detail::require(y < r && s < c, "z_given", "cell index out of range");
      zg[y * c + s] = cell.at(2).get<std::vector<double>>();
    }
    out.set_z_given(std::move(zg));
  }
  return out;
}

inline Json to_json(const SizeBiasCoupling& c) {
  Json rows = Json::array();
  for (std::size_t y = 0; y < c.rows(); ++y) {
    Json row = Json::array();
    for (std::size_t s = 0; s < c.cols(); ++s) row.push_back(c(y, s));
    rows.push_back(std::move(row));
  }
  Json j{{"joint", rows}};
  if (c.has_z()) {
    Json zg = Json::array();
    for (std::size_t y = 0; y < c.rows(); ++y)
      for (std::size_t s = 0; s < c.cols(); ++s)
        if (c(y, s) > 0.0) zg.push_back(Json{y, s, c.z_given(y, s)});
    j["z_given"] = std::move(zg);
  }
  return j;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string to_csv(const BoundBreakdown& b) {
  std::ostringstream os;
  os << "label,value\n";
  for (const auto& t : b.terms) os << t.label << ',' << format_real(t.value) << '\n';
  os << "total," << format_real(b.total) << '\n';
  return os.str();
}

inline std::string to_csv(const EmpiricalLaw& e) {
  std::ostringstream os;
  os << "value,count,frequency\n";
  for (std::size_t v = 0; v < e.counts.size(); ++v)
    os << v << ',' << e.counts[v] << ','
       << format_real(static_cast<double>(e.counts[v]) / static_cast<double>(e.reps)) << '\n';
  return os.str();
}

}  // namespace steinlab
