#pragma once

// Scenario-driven runners behind the command line tool: parse a JSON
// scenario, dispatch to the matching module, write a CSV grid plus a JSON
// summary, and report PASS or FAIL.  Configuration problems throw
// ScenarioError (exit 2); module failures produce a FAIL report (exit 1)
// with the error and any partial outputs flagged.  Runs are seeded and
// written in a fixed order, so identical scenarios give byte-identical
// outputs.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "reflexcr/cr_extension.hpp"
#include "reflexcr/eow.hpp"
#include "reflexcr/expression.hpp"
#include "reflexcr/reflection.hpp"
#include "reflexcr/series.hpp"
#include "reflexcr/wedge.hpp"

namespace reflexcr {

using Json = nlohmann::json;

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

/// Validated scenario: the raw document plus the shared knobs with their
/// defaults resolved.
struct Scenario {
  std::string kind;
  Json raw;
  std::size_t nodes = 256;
  unsigned seed = 1;
  std::size_t samples = 0;  // 0: per-kind default
  double tol = 0.0;
  double cr_tol = 0.0;
};

/// Outcome of one run: exit code 0 on PASS, 1 otherwise.
struct RunReport {
  bool pass = false;
  std::string status;  // PASS | FAIL | NOT-APPLICABLE
  int exit_code = 1;
  Json summary;
  std::vector<std::string> files;
};

namespace detail {

// ---------------------------------------------------------------- helpers

inline std::string fmt17(double v) {
  std::array<char, 64> buf;
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                           std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

struct CsvBuilder {
  std::string buf;

  void row(const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j) buf += ',';
      buf += cells[j];
    }
    buf += '\n';
  }
};

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ScenarioError("scenario: cannot open output file " + p.string());
  os << s;
  if (!os) throw ScenarioError("scenario: failed writing " + p.string());
}

inline const Json& need(const Json& j, const std::string& kind, const char* field) {
  auto it = j.find(field);
  if (it == j.end())
    throw ScenarioError("scenario: kind=" + kind + " requires field '" + field + "'");
  return *it;
}

inline double need_num(const Json& j, const std::string& kind, const char* field) {
  const Json& v = need(j, kind, field);
  if (!v.is_number())
    throw ScenarioError("scenario: field '" + std::string(field) +
                        "' must be a number");
  return v.get<double>();
}

inline std::size_t need_uint(const Json& j, const std::string& kind,
                             const char* field) {
  const Json& v = need(j, kind, field);
  if (!v.is_number_unsigned())
    throw ScenarioError("scenario: field '" + std::string(field) +
                        "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

inline std::string need_str(const Json& j, const std::string& kind,
                            const char* field) {
  const Json& v = need(j, kind, field);
  if (!v.is_string())
    throw ScenarioError("scenario: field '" + std::string(field) +
                        "' must be a string");
  return v.get<std::string>();
}

inline double opt_num(const Json& j, const char* field, double dflt) {
  auto it = j.find(field);
  if (it == j.end()) return dflt;
  if (!it->is_number())
    throw ScenarioError("scenario: field '" + std::string(field) +
                        "' must be a number");
  return it->get<double>();
}

inline std::size_t opt_uint(const Json& j, const char* field, std::size_t dflt) {
  auto it = j.find(field);
  if (it == j.end()) return dflt;
  if (!it->is_number_unsigned())
    throw ScenarioError("scenario: field '" + std::string(field) +
                        "' must be a nonnegative integer");
  return it->get<std::size_t>();
}

inline bool opt_bool(const Json& j, const char* field, bool dflt) {
  auto it = j.find(field);
  if (it == j.end()) return dflt;
  if (!it->is_boolean())
    throw ScenarioError("scenario: field '" + std::string(field) +
                        "' must be a boolean");
  return it->get<bool>();
}

inline std::vector<double> need_dvec(const Json& j, const std::string& kind,
                                     const char* field, std::size_t want = 0) {
  const Json& v = need(j, kind, field);
  if (!v.is_array())
    throw ScenarioError("scenario: field '" + std::string(field) +
                        "' must be an array of numbers");
  std::vector<double> out;
  for (const Json& e : v) {
    if (!e.is_number())
      throw ScenarioError("scenario: field '" + std::string(field) +
                          "' must contain numbers only");
    out.push_back(e.get<double>());
  }
  if (want != 0 && out.size() != want)
    throw ScenarioError("scenario: field '" + std::string(field) + "' must have " +
                        std::to_string(want) + " entries");
  return out;
}

inline Expression parse_expr(const Json& j, const std::string& kind,
                             const char* field, std::vector<std::string> vars) {
  std::string text = need_str(j, kind, field);
  try {
    return Expression::parse(text, std::move(vars));
  } catch (const ExpressionError& e) {
    throw ScenarioError("scenario: field '" + std::string(field) + "': " + e.what());
  }
}

inline std::optional<Expression> opt_expr(const Json& j, const std::string& kind,
                                          const char* field,
                                          std::vector<std::string> vars) {
  if (!j.contains(field)) return std::nullopt;
  return parse_expr(j, kind, field, std::move(vars));
}

inline PowerSeries1D parse_series1(const Json& j, const char* field) {
  const double inf = std::numeric_limits<double>::infinity();
  if (j.is_array()) {
    std::vector<double> c;
    for (const Json& e : j) {
      if (!e.is_number())
        throw ScenarioError("scenario: field '" + std::string(field) +
                            "' must contain numeric coefficients");
      c.push_back(e.get<double>());
    }
    return PowerSeries1D(std::move(c));
  }
  if (j.is_object() && j.contains("builtin")) {
    const std::string name = j["builtin"].get<std::string>();
    const std::size_t order = opt_uint(j, "order", kSeriesOrder);
    const double radius = opt_num(j, "radius", inf);
    PowerSeries1D s({0.0});
    if (name == "sin")
      s = sin_series(order);
    else if (name == "cos")
      s = cos_series(order);
    else if (name == "exp")
      s = exp_series(order);
    else if (name == "zero")
      s = PowerSeries1D({0.0});
    else
      throw ScenarioError("scenario: field '" + std::string(field) +
                          "': unknown builtin series '" + name + "'");
    if (radius == inf) return s;
    std::vector<double> c(s.order() + 1);
    for (std::size_t n = 0; n <= s.order(); ++n) c[n] = s.coeff(n);
    return PowerSeries1D(std::move(c), radius);
  }
  if (j.is_object() && j.contains("coefficients")) {
    std::vector<double> c;
    for (const Json& e : j["coefficients"]) {
      if (!e.is_number())
        throw ScenarioError("scenario: field '" + std::string(field) +
                            "' must contain numeric coefficients");
      c.push_back(e.get<double>());
    }
    return PowerSeries1D(std::move(c), opt_num(j, "radius", inf));
  }
  throw ScenarioError("scenario: field '" + std::string(field) +
                      "' must be a coefficient array, {coefficients,radius} or "
                      "{builtin,...}");
}

inline MultiSeries parse_multiseries(const Json& j, const char* field,
                                     std::size_t want_nvars) {
  if (!j.is_object() || !j.contains("nvars") || !j.contains("terms"))
    throw ScenarioError("scenario: field '" + std::string(field) +
                        "' must be an object with 'nvars' and 'terms'");
  const std::size_t nvars = j["nvars"].get<std::size_t>();
  if (want_nvars != 0 && nvars != want_nvars)
    throw ScenarioError("scenario: field '" + std::string(field) + "' must use " +
                        std::to_string(want_nvars) + " variables, got " +
                        std::to_string(nvars));
  const std::size_t degree = opt_uint(j, "degree", 16);
  std::vector<MultiSeries::Term> terms;
  for (const Json& t : j["terms"]) {
    if (!t.is_array() || t.size() != 2 || !t[0].is_array() || !t[1].is_number())
      throw ScenarioError("scenario: field '" + std::string(field) +
                          "': each term must be [[exponents...], coefficient]");
    std::vector<int> alpha;
    for (const Json& a : t[0]) alpha.push_back(a.get<int>());
    if (alpha.size() != nvars)
      throw ScenarioError("scenario: field '" + std::string(field) +
                          "': exponent tuple length must equal nvars");
    terms.push_back({std::move(alpha), t[1].get<double>()});
  }
  try {
    return MultiSeries::from_terms(nvars, degree, terms);
  } catch (const std::exception& e) {
    throw ScenarioError("scenario: field '" + std::string(field) + "': " + e.what());
  }
}

inline Cone parse_cone(const Json& j, const char* field, std::size_t dim) {
  const Json* g = &j;
  if (j.is_object()) {
    auto it = j.find("generators");
    if (it == j.end())
      throw ScenarioError("scenario: field '" + std::string(field) +
                          "' must contain 'generators'");
    g = &*it;
  }
  if (!g->is_array() || g->empty())
    throw ScenarioError("scenario: field '" + std::string(field) +
                        "' must be a nonempty array of generators");
  std::vector<std::vector<double>> gens;
  for (const Json& row : *g) {
    std::vector<double> v;
    for (const Json& e : row) v.push_back(e.get<double>());
    if (v.size() != dim)
      throw ScenarioError("scenario: field '" + std::string(field) +
                          "': generators must have " + std::to_string(dim) +
                          " components");
    gens.push_back(std::move(v));
  }
  try {
    return Cone(dim, std::move(gens), field);
  } catch (const std::exception& e) {
    throw ScenarioError("scenario: field '" + std::string(field) + "': " + e.what());
  }
}

inline std::vector<double> parse_matrix(const Json& j, const char* field,
                                        std::size_t d) {
  std::vector<double> m;
  if (j.is_array() && !j.empty() && j[0].is_array()) {
    for (const Json& row : j)
      for (const Json& e : row) m.push_back(e.get<double>());
  } else if (j.is_array()) {
    for (const Json& e : j) m.push_back(e.get<double>());
  }
  if (m.size() != d * d)
    throw ScenarioError("scenario: field '" + std::string(field) + "' must be a " +
                        std::to_string(d) + "x" + std::to_string(d) + " matrix");
  return m;
}

inline GenericManifold parse_manifold(const Json& j, const std::string& kind) {
  const std::size_t n = need_uint(j, kind, "n");
  const std::size_t d = need_uint(j, kind, "d");
  const Json& pj = need(j, kind, "phi");
  if (!pj.is_array() || pj.size() != d)
    throw ScenarioError("scenario: field 'phi' must be an array of " +
                        std::to_string(d) + " series");
  std::vector<MultiSeries> phi;
  for (const Json& p : pj) phi.push_back(parse_multiseries(p, "phi", 2 * n + d));
  std::vector<double> base =
      n == 0 ? std::vector<double>{} : need_dvec(j, kind, "base_radius", n);
  std::vector<double> param = need_dvec(j, kind, "param_radius", d);
  try {
    return GenericManifold(n, d, std::move(phi), std::move(base), std::move(param));
  } catch (const std::exception& e) {
    throw ScenarioError(std::string("scenario: invalid manifold: ") + e.what());
  }
}

inline std::vector<std::string> block_vars(const char* prefix, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t j = 1; j <= count; ++j)
    out.push_back(std::string(prefix) + std::to_string(j));
  return out;
}

inline std::vector<std::string> ambient_vars(std::size_t n, std::size_t d) {
  std::vector<std::string> out = block_vars("z", n);
  for (auto& v : block_vars("w", d)) out.push_back(std::move(v));
  return out;
}

inline std::vector<std::string> coord_headers(const char* prefix, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t j = 1; j <= count; ++j) {
    out.push_back(std::string(prefix) + std::to_string(j) + "_re");
    out.push_back(std::string(prefix) + std::to_string(j) + "_im");
  }
  return out;
}

inline Json base_summary(const Scenario& sc) {
  Json s;
  s["kind"] = sc.kind;
  s["scenario"] = sc.raw;
  s["seed"] = sc.seed;
  s["nodes"] = sc.nodes;
  s["tolerances"] = Json{{"tol", sc.tol}, {"cr_tol", sc.cr_tol}};
  return s;
}

inline RunReport finalize(Json summary, const std::filesystem::path& out,
                          std::vector<std::string> files, bool pass,
                          std::string status) {
  summary["outputs"] = files;
  summary["pass"] = pass;
  summary["status"] = status;
  RunReport r;
  r.pass = pass;
  r.status = std::move(status);
  r.exit_code = pass ? 0 : 1;
  r.summary = summary;
  r.files = std::move(files);
  write_text(out / "summary.json", summary.dump(2) + "\n");
  return r;
}

inline RunReport module_failure(Json summary, const std::filesystem::path& out,
                                std::vector<std::string> files,
                                const std::string& error) {
  summary["error"] = error;
  summary["partial"] = !files.empty();
  return finalize(std::move(summary), out, std::move(files), false, "FAIL");
}

/// Point in the disc of radius r; half < 0 keeps Im below 0, half > 0 above,
/// half == 0 uses the full disc.
inline Complex sample_disc(std::mt19937_64& rng, double r, int half) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double rho = r * std::sqrt(u(rng));
  const double ang = half == 0  ? 2.0 * kPi * u(rng)
                     : half < 0 ? kPi + kPi * u(rng)
                                : kPi * u(rng);
  return std::polar(rho, ang);
}

// One-variable CSV: x, y, F, optional oracle, residual column.
struct Row1D {
  Complex z;
  Complex F;
  std::optional<Complex> oracle;
  double residual = 0.0;
};

inline std::string csv_1d(const std::vector<Row1D>& rows, const char* residual_name) {
  CsvBuilder csv;
  csv.row({"x", "y", "F_re", "F_im", "oracle_re", "oracle_im", "abs_err",
           residual_name});
  for (const Row1D& r : rows) {
    std::vector<std::string> cells{fmt17(r.z.real()), fmt17(r.z.imag()),
                                   fmt17(r.F.real()), fmt17(r.F.imag())};
    if (r.oracle) {
      cells.push_back(fmt17(r.oracle->real()));
      cells.push_back(fmt17(r.oracle->imag()));
      cells.push_back(fmt17(std::abs(r.F - *r.oracle)));
    } else {
      cells.insert(cells.end(), {"", "", ""});
    }
    cells.push_back(fmt17(r.residual));
    csv.row(cells);
  }
  return csv.buf;
}

// ---------------------------------------------------------------- reflect

inline RunReport run_reflect(const Scenario& sc, const std::filesystem::path& out) {
  const Json& j = sc.raw;
  Expression f = parse_expr(j, sc.kind, "f", {"z"});
  std::optional<Expression> oracle = opt_expr(j, sc.kind, "oracle", {"z"});
  PowerSeries1D trace = parse_series1(need(j, sc.kind, "trace"), "trace");
  const double radius = opt_num(j, "radius", 1.0);
  const double sample_radius = opt_num(j, "sample_radius", 0.9 * radius);
  const bool classical = opt_bool(j, "classical", false);
  const std::size_t samples = sc.samples ? sc.samples : 1000;

  Json summary = base_summary(sc);
  std::vector<std::string> files;
  try {
    AnalyticFunction upper(1, f.evaluator(), DomainBox::upper_half_disc(radius));
    HalfDiscFunction h(std::move(upper), std::move(trace));
    AnalyticFunction F = classical ? classical_reflect(h) : general_reflect(h);

    std::mt19937_64 rng(sc.seed);
    const double guard = 3e-5;
    std::vector<Row1D> rows;
    std::size_t tries = 0;
    while (rows.size() < samples) {
      if (++tries > 200 * samples)
        throw std::runtime_error(
            "reflect: could not place the sample grid inside the extension "
            "domain; shrink sample_radius");
      const Complex z = sample_disc(rng, sample_radius, -1);
      if (!F.in_domain({z}) || !F.in_domain({z + Complex(guard, guard)}) ||
          !F.in_domain({z - Complex(guard, guard)}))
        continue;
      Row1D r;
      r.z = z;
      r.F = F(z);
      r.residual = cr_residual(F, {z});
      if (oracle) r.oracle = oracle->eval({z});
      rows.push_back(std::move(r));
    }

    double max_abs = 0.0, max_cr = 0.0;
    for (const Row1D& r : rows) {
      if (r.oracle) max_abs = std::max(max_abs, std::abs(r.F - *r.oracle));
      max_cr = std::max(max_cr, r.residual);
    }
    write_text(out / "reflect.csv", csv_1d(rows, "cr_residual"));
    files.push_back("reflect.csv");

    summary["metrics"] = Json{{"max_abs_error", oracle ? Json(max_abs) : Json()},
                              {"max_cr_residual", max_cr},
                              {"points", rows.size()}};
    const bool pass = (!oracle || max_abs < sc.tol) && max_cr < sc.cr_tol;
    return finalize(std::move(summary), out, std::move(files), pass,
                    pass ? "PASS" : "FAIL");
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    return module_failure(std::move(summary), out, std::move(files), e.what());
  }
}

// ---------------------------------------------------------------- harmonic

inline RunReport run_harmonic(const Scenario& sc, const std::filesystem::path& out) {
  const Json& j = sc.raw;
  Expression vexpr = parse_expr(j, sc.kind, "v", {"x", "y"});
  std::optional<Expression> oracle = opt_expr(j, sc.kind, "oracle", {"x", "y"});
  PowerSeries1D trace = parse_series1(need(j, sc.kind, "trace"), "trace");
  const double radius = opt_num(j, "radius", 1.0);
  const double sample_radius = opt_num(j, "sample_radius", 0.8 * radius);
  const std::size_t samples = sc.samples ? sc.samples : 1000;

  Json summary = base_summary(sc);
  std::vector<std::string> files;
  try {
    auto v = [vexpr](double x, double y) {
      return vexpr.eval({Complex(x, 0.0), Complex(y, 0.0)}).real();
    };
    HarmonicExtension H = harmonic_reflect(v, trace, radius);
    auto Heval = [H](double x, double y) { return H(x, y); };

    std::mt19937_64 rng(sc.seed);
    std::vector<Row1D> rows;
    double max_abs = 0.0, max_lap = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
      const Complex z = sample_disc(rng, sample_radius, 0);
      Row1D r;
      r.z = z;
      r.F = Complex(H(z.real(), z.imag()), 0.0);
      r.residual = std::abs(discrete_laplacian(Heval, z.real(), z.imag()));
      const Expression& ref = oracle ? *oracle : vexpr;
      r.oracle = Complex(
          ref.eval({Complex(z.real(), 0.0), Complex(z.imag(), 0.0)}).real(), 0.0);
      max_abs = std::max(max_abs, std::abs(r.F - *r.oracle));
      max_lap = std::max(max_lap, r.residual);
      rows.push_back(std::move(r));
    }
    write_text(out / "harmonic.csv", csv_1d(rows, "laplacian"));
    files.push_back("harmonic.csv");

    summary["metrics"] = Json{{"max_abs_error", max_abs},
                              {"max_laplacian", max_lap},
                              {"points", rows.size()}};
    const bool pass = max_abs < sc.tol && max_lap < sc.cr_tol;
    return finalize(std::move(summary), out, std::move(files), pass,
                    pass ? "PASS" : "FAIL");
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    return module_failure(std::move(summary), out, std::move(files), e.what());
  }
}

// ---------------------------------------------------------------- curve

inline RunReport run_curve(const Scenario& sc, const std::filesystem::path& out) {
  const Json& j = sc.raw;
  Expression f = parse_expr(j, sc.kind, "f", {"z"});
  std::optional<Expression> oracle = opt_expr(j, sc.kind, "oracle", {"z"});
  PowerSeries1D gamma = parse_series1(need(j, sc.kind, "gamma"), "gamma");
  const double radius = opt_num(j, "radius", 1.0);
  const double chart_radius = opt_num(j, "chart_radius", 0.5);
  const double sample_radius = opt_num(j, "sample_radius", 0.2);
  const std::size_t samples = sc.samples ? sc.samples : 1000;

  const Json& tj = need(j, sc.kind, "trace");
  const bool fit_trace =
      tj.is_object() && tj.contains("builtin") && tj["builtin"] == "fit";
  const std::size_t fit_degree = fit_trace ? opt_uint(tj, "degree", 32) : 0;
  std::optional<PowerSeries1D> trace;
  if (!fit_trace) trace = parse_series1(tj, "trace");

  Json summary = base_summary(sc);
  std::vector<std::string> files;
  try {
    AnalyticFunction fa(1, f.evaluator(), DomainBox::disc(radius));
    if (fit_trace) {
      // Trace of Im f on the curve, fitted on axis samples of the pulled
      // back function zeta -> f(zeta + i gamma(zeta)).
      PowerSeries1D g = gamma;
      AnalyticFunction pulled(
          1,
          [fa, g](const ComplexVector& p) {
            return fa(p[0] + Complex(0.0, 1.0) * g(p[0]));
          },
          DomainBox::disc(2.0 * chart_radius), Provenance::BlackBox,
          [](const ComplexVector&) { return true; });
      trace = fit_trace_least_squares(pulled, fit_degree, chart_radius);
    }
    AnalyticFunction F = curve_flatten_reflect(fa, gamma, *trace, chart_radius);

    std::mt19937_64 rng(sc.seed);
    const double guard = 3e-5;
    std::vector<Row1D> rows;
    std::size_t tries = 0;
    while (rows.size() < samples) {
      if (++tries > 200 * samples)
        throw std::runtime_error(
            "curve: could not place the sample grid inside the extension "
            "domain; shrink sample_radius");
      const Complex z = sample_disc(rng, sample_radius, 0);
      if (!F.in_domain({z}) || !F.in_domain({z + Complex(guard, guard)}) ||
          !F.in_domain({z - Complex(guard, guard)}))
        continue;
      Row1D r;
      r.z = z;
      r.F = F(z);
      r.residual = cr_residual(F, {z});
      if (oracle) r.oracle = oracle->eval({z});
      rows.push_back(std::move(r));
    }

    double max_abs = 0.0, max_cr = 0.0;
    for (const Row1D& r : rows) {
      if (r.oracle) max_abs = std::max(max_abs, std::abs(r.F - *r.oracle));
      max_cr = std::max(max_cr, r.residual);
    }
    write_text(out / "curve.csv", csv_1d(rows, "cr_residual"));
    files.push_back("curve.csv");

    summary["metrics"] = Json{{"max_abs_error", oracle ? Json(max_abs) : Json()},
                              {"max_cr_residual", max_cr},
                              {"points", rows.size()},
                              {"trace_fitted", fit_trace}};
    const bool pass = (!oracle || max_abs < sc.tol) && max_cr < sc.cr_tol;
    return finalize(std::move(summary), out, std::move(files), pass,
                    pass ? "PASS" : "FAIL");
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    return module_failure(std::move(summary), out, std::move(files), e.what());
  }
}

// ---------------------------------------------------------------- eow

inline RunReport run_eow(const Scenario& sc, const std::filesystem::path& out) {
  const Json& j = sc.raw;
  const std::size_t d = need_uint(j, sc.kind, "d");
  if (d == 0) throw ScenarioError("scenario: field 'd' must be positive");
  Expression g_expr = parse_expr(j, sc.kind, "g", block_vars("w", d));
  std::optional<Expression> oracle = opt_expr(j, sc.kind, "oracle", block_vars("w", d));
  std::vector<double> edge_radii = need_dvec(j, sc.kind, "edge_radii", d);
  const double ball = need_num(j, sc.kind, "ball");
  Cone cone = parse_cone(need(j, sc.kind, "cone"), "cone", d);
  std::optional<std::vector<double>> matrix;
  if (j.contains("matrix")) matrix = parse_matrix(j["matrix"], "matrix", d);
  const bool sweep = opt_bool(j, "sweep", false);
  const std::size_t samples = sc.samples ? sc.samples : 400;

  Json summary = base_summary(sc);
  std::vector<std::string> files;
  try {
    EOWDomain dom(edge_radii, cone, ball);
    AnalyticFunction g = wedge_function(dom, g_expr.evaluator());
    NormalizationMap norm = matrix ? NormalizationMap(*matrix, cone)
                                   : NormalizationMap::from_cone(cone);

    // Model-coordinate sample set, fixed across the node sweep; every
    // fourth point sits on the real edge.
    std::mt19937_64 rng(sc.seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::vector<ComplexVector> model(samples);
    for (std::size_t k = 0; k < samples; ++k) {
      ComplexVector wt(d);
      for (auto& c : wt)
        c = (k % 4 == 0) ? Complex(u(rng), 0.0) : Complex(u(rng), u(rng));
      model[k] = std::move(wt);
    }

    std::vector<std::size_t> node_list =
        sweep ? std::vector<std::size_t>{16, 32, 64, 128, 256}
              : std::vector<std::size_t>{sc.nodes};
    std::vector<std::pair<std::size_t, double>> convergence;
    std::optional<EowExtension> ext;
    for (std::size_t nn : node_list) {
      ext = eow_extend(g, dom, norm, nn);
      double max_abs = 0.0;
      for (const ComplexVector& wt : model) {
        ComplexVector w = apply_matrix(ext->forward, d, wt);
        std::optional<Complex> ref;
        if (oracle)
          ref = oracle->eval(w);
        else if (dom.classify(w) != EOWDomain::Region::Outside)
          ref = g(w);
        if (ref) max_abs = std::max(max_abs, std::abs(ext->G(w) - *ref));
      }
      convergence.push_back({nn, max_abs});
    }

    // Grid CSV at the final node count.
    CsvBuilder csv;
    std::vector<std::string> header = coord_headers("w", d);
    for (const char* c : {"F_re", "F_im", "oracle_re", "oracle_im", "abs_err",
                          "cr_residual"})
      header.push_back(c);
    csv.row(header);
    double max_abs = 0.0, max_cr = 0.0;
    for (const ComplexVector& wt : model) {
      ComplexVector w = apply_matrix(ext->forward, d, wt);
      const Complex F = ext->G(w);
      const double cr = cr_residual(ext->G, w);
      std::optional<Complex> ref;
      if (oracle)
        ref = oracle->eval(w);
      else if (dom.classify(w) != EOWDomain::Region::Outside)
        ref = g(w);
      std::vector<std::string> cells;
      for (Complex c : w) {
        cells.push_back(fmt17(c.real()));
        cells.push_back(fmt17(c.imag()));
      }
      cells.push_back(fmt17(F.real()));
      cells.push_back(fmt17(F.imag()));
      if (ref) {
        cells.push_back(fmt17(ref->real()));
        cells.push_back(fmt17(ref->imag()));
        cells.push_back(fmt17(std::abs(F - *ref)));
        max_abs = std::max(max_abs, std::abs(F - *ref));
      } else {
        cells.insert(cells.end(), {"", "", ""});
      }
      cells.push_back(fmt17(cr));
      max_cr = std::max(max_cr, cr);
      csv.row(cells);
    }
    write_text(out / "eow.csv", csv.buf);
    files.push_back("eow.csv");

    bool decay_ok = true;
    if (sweep) {
      CsvBuilder conv;
      conv.row({"nodes", "max_abs_error"});
      for (auto& [nn, err] : convergence)
        conv.row({std::to_string(nn), fmt17(err)});
      write_text(out / "convergence.csv", conv.buf);
      files.push_back("convergence.csv");
      for (std::size_t k = 1; k < convergence.size(); ++k) {
        const double prev = convergence[k - 1].second;
        const double cur = convergence[k].second;
        if (!(cur < 0.1 * prev || cur < 1e-12)) decay_ok = false;
      }
    }

    Json conv_json = Json::array();
    for (auto& [nn, err] : convergence) conv_json.push_back(Json{nn, err});
    summary["metrics"] = Json{{"max_abs_error", max_abs},
                              {"max_cr_residual", max_cr},
                              {"scale", ext->scale},
                              {"convergence", conv_json},
                              {"monotone_decay", decay_ok},
                              {"points", model.size()}};
    const bool pass = max_abs < sc.tol && max_cr < sc.cr_tol && decay_ok;
    return finalize(std::move(summary), out, std::move(files), pass,
                    pass ? "PASS" : "FAIL");
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    return module_failure(std::move(summary), out, std::move(files), e.what());
  }
}

// ---------------------------------------------------------------- crextend

inline std::string csv_chart(const std::vector<ComplexVector>& zs,
                             const std::vector<ComplexVector>& ws,
                             const std::vector<Complex>& values,
                             const std::vector<Complex>* oracle,
                             const std::vector<double>* errs,
                             const std::vector<double>& residuals) {
  const std::size_t n = zs.empty() ? 0 : zs.front().size();
  const std::size_t d = ws.empty() ? 0 : ws.front().size();
  CsvBuilder csv;
  std::vector<std::string> header = coord_headers("z", n);
  for (auto& h : coord_headers("w", d)) header.push_back(std::move(h));
  for (const char* c : {"F_re", "F_im", "oracle_re", "oracle_im", "abs_err",
                        "cr_residual"})
    header.push_back(c);
  csv.row(header);
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::vector<std::string> cells;
    for (Complex c : zs[k]) {
      cells.push_back(fmt17(c.real()));
      cells.push_back(fmt17(c.imag()));
    }
    for (Complex c : ws[k]) {
      cells.push_back(fmt17(c.real()));
      cells.push_back(fmt17(c.imag()));
    }
    cells.push_back(fmt17(values[k].real()));
    cells.push_back(fmt17(values[k].imag()));
    if (oracle) {
      cells.push_back(fmt17((*oracle)[k].real()));
      cells.push_back(fmt17((*oracle)[k].imag()));
      cells.push_back(fmt17((*errs)[k]));
    } else {
      cells.insert(cells.end(), {"", "", ""});
    }
    cells.push_back(fmt17(residuals[k]));
    csv.row(cells);
  }
  return csv.buf;
}

inline RunReport run_crextend(const Scenario& sc, const std::filesystem::path& out) {
  const Json& j = sc.raw;
  GenericManifold manifold = parse_manifold(j, sc.kind);
  const std::size_t n = manifold.n(), d = manifold.d();
  Cone cone = parse_cone(need(j, sc.kind, "cone"), "cone", d);
  Expression f_expr = parse_expr(j, sc.kind, "f", ambient_vars(n, d));
  std::optional<Expression> oracle =
      opt_expr(j, sc.kind, "oracle", ambient_vars(n, d));
  MultiSeries trace = parse_multiseries(need(j, sc.kind, "trace"), "trace",
                                        2 * n + d);
  std::optional<Cone> gamma_prime;
  if (j.contains("gamma_prime"))
    gamma_prime = parse_cone(j["gamma_prime"], "gamma_prime", d);
  std::optional<std::vector<double>> matrix;
  if (j.contains("normalization"))
    matrix = parse_matrix(j["normalization"], "normalization", d);
  ChartBoxes boxes;
  if (j.contains("boxes")) {
    boxes.base_radius = opt_num(j["boxes"], "base", boxes.base_radius);
    boxes.t_radius = opt_num(j["boxes"], "t", boxes.t_radius);
  }
  const bool dump_stages = opt_bool(j, "dump_stages", false);
  const std::size_t samples = sc.samples ? sc.samples : 60;

  Json summary = base_summary(sc);
  summary["stages"] = Json::array({"subcone", "pullback", "trace", "reflect",
                                   "normalize", "extend", "reassemble", "report"});
  std::vector<std::string> files;

  PipelineParts parts;
  auto dump_parts = [&]() {
    if (!dump_stages) return;
    std::mt19937_64 rng(sc.seed + 17);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::uniform_real_distribution<double> up(0.1, 0.9);
    auto draw_z = [&](double radius) {
      ComplexVector z(n);
      for (auto& c : z) c = Complex(radius * u(rng), radius * u(rng));
      return z;
    };
    if (parts.pulled_back) {
      const ChartFunction& pb = *parts.pulled_back;
      std::vector<double> ax = pb.cone().axis();
      std::vector<ComplexVector> zs, ws;
      std::vector<Complex> vals;
      std::vector<double> res;
      for (int k = 0; k < 32; ++k) {
        ComplexVector z = draw_z(pb.boxes().base_radius);
        const double scale = (k % 4 == 0) ? 0.0 : up(rng) * 0.5;
        ComplexVector w(d);
        for (std::size_t q = 0; q < d; ++q)
          w[q] = Complex(pb.boxes().base_radius * u(rng),
                         scale * pb.boxes().t_radius * ax[q]);
        zs.push_back(z);
        ws.push_back(w);
        vals.push_back(pb(z, w));
        res.push_back(0.0);
      }
      write_text(out / "stage_pullback.csv",
                 csv_chart(zs, ws, vals, nullptr, nullptr, res));
      files.push_back("stage_pullback.csv");
    }
    if (parts.reflected) {
      const GFunction& gf = *parts.reflected;
      std::vector<double> ax = gf.cone().axis();
      std::vector<ComplexVector> zs, ws;
      std::vector<Complex> vals;
      std::vector<double> res;
      for (int k = 0; k < 32; ++k) {
        ComplexVector z = draw_z(gf.boxes().base_radius);
        const double side = (k % 3 == 0) ? 0.0 : (k % 3 == 1 ? 1.0 : -1.0);
        const double scale = side == 0.0 ? 0.0 : up(rng) * 0.5;
        ComplexVector w(d);
        for (std::size_t q = 0; q < d; ++q)
          w[q] = Complex(gf.boxes().base_radius * u(rng),
                         side * scale * gf.boxes().t_radius * ax[q]);
        zs.push_back(z);
        ws.push_back(w);
        vals.push_back(gf(z, w));
        res.push_back(0.0);
      }
      write_text(out / "stage_g.csv", csv_chart(zs, ws, vals, nullptr, nullptr, res));
      files.push_back("stage_g.csv");
    }
    if (parts.averaged) {
      const CrExtended& G = *parts.averaged;
      std::vector<ComplexVector> zs, ws;
      std::vector<Complex> vals;
      std::vector<double> res;
      for (int k = 0; k < 32; ++k) {
        ComplexVector z = draw_z(G.z_radius());
        ComplexVector wt(d);
        for (auto& c : wt) c = Complex(u(rng), u(rng));
        ComplexVector w = apply_matrix(G.forward(), d, wt);
        zs.push_back(z);
        ws.push_back(w);
        vals.push_back(G(z, w));
        res.push_back(0.0);
      }
      write_text(out / "stage_G.csv", csv_chart(zs, ws, vals, nullptr, nullptr, res));
      files.push_back("stage_G.csv");
    }
  };

  try {
    Wedge wedge{manifold, cone};
    AnalyticFunction f = wedge_restriction(wedge, f_expr.evaluator());
    WedgeFunction wf(wedge, std::move(f), std::move(trace));

    CrPipelineOptions opt;
    opt.gamma_prime = gamma_prime;
    opt.boxes = boxes;
    opt.nodes = sc.nodes;
    opt.seed = sc.seed;
    opt.report_samples = samples;
    if (matrix) {
      Cone target = gamma_prime ? *gamma_prime : cone.shrunk(0.5);
      opt.normalization = NormalizationMap(*matrix, target);
    }
    if (oracle) opt.oracle = oracle->evaluator();

    ExtensionResult r = extend_cr_function(wf, opt, &parts);
    dump_parts();

    double max_abs = 0.0, max_cr = 0.0;
    if (r.report) {
      const ResidualReport& rep = *r.report;
      std::vector<ComplexVector> zs, ws;
      for (const ComplexVector& p : rep.grid.points) {
        zs.push_back(ComplexVector(p.begin(), p.begin() + n));
        ws.push_back(ComplexVector(p.begin() + n, p.end()));
      }
      write_text(out / "crextend.csv",
                 csv_chart(zs, ws, rep.grid.values, &*rep.oracle_values,
                           &rep.abs_errors, rep.cr_residuals));
      files.push_back("crextend.csv");
      max_abs = rep.max_abs_error;
      max_cr = rep.max_cr_residual;
    } else {
      // No oracle: sample the chart grid directly, residuals only.
      std::mt19937_64 rng(sc.seed + 13);
      std::uniform_real_distribution<double> u(-0.5, 0.5);
      std::uniform_real_distribution<double> up(0.1, 0.5);
      std::vector<ComplexVector> zs, ws;
      std::vector<Complex> vals;
      std::vector<double> res;
      for (std::size_t k = 0; k < samples; ++k) {
        ComplexVector z(n);
        for (auto& c : z) c = Complex(r.z_radius * u(rng), r.z_radius * u(rng));
        ComplexVector wt(d);
        const int kind = static_cast<int>(k % 3);
        for (auto& c : wt) {
          const double im = kind == 0 ? 0.0 : (kind == 1 ? up(rng) : -up(rng));
          c = Complex(u(rng), im);
        }
        ComplexVector w = apply_matrix(r.forward, d, wt);
        const Complex val = r.chart(z, w);
        const double h = kCrStep;
        double worst = 0.0;
        ComplexVector wp = w;
        for (std::size_t q = 0; q < d; ++q) {
          const Complex w0 = wp[q];
          wp[q] = w0 + h;
          const Complex fxp = r.chart(z, wp);
          wp[q] = w0 - h;
          const Complex fxm = r.chart(z, wp);
          wp[q] = w0 + Complex(0.0, h);
          const Complex fyp = r.chart(z, wp);
          wp[q] = w0 - Complex(0.0, h);
          const Complex fym = r.chart(z, wp);
          wp[q] = w0;
          const Complex dx = (fxp - fxm) / (2.0 * h);
          const Complex dy = (fyp - fym) / (2.0 * h);
          worst = std::max(worst, std::abs(dx + Complex(0.0, 1.0) * dy) / 2.0);
        }
        zs.push_back(std::move(z));
        ws.push_back(std::move(w));
        vals.push_back(val);
        res.push_back(worst);
        max_cr = std::max(max_cr, worst);
      }
      write_text(out / "crextend.csv", csv_chart(zs, ws, vals, nullptr, nullptr, res));
      files.push_back("crextend.csv");
    }

    summary["metrics"] = Json{{"max_abs_error", r.report ? Json(max_abs) : Json()},
                              {"max_cr_residual", max_cr},
                              {"scale", r.scale},
                              {"z_radius", r.z_radius},
                              {"points", r.report ? r.report->grid.points.size()
                                                  : samples}};
    const bool pass = (!r.report || max_abs < sc.tol) && max_cr < sc.cr_tol;
    return finalize(std::move(summary), out, std::move(files), pass,
                    pass ? "PASS" : "FAIL");
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    dump_parts();  // stages computed before the failure, flagged as partial
    return module_failure(std::move(summary), out, std::move(files), e.what());
  }
}

// ---------------------------------------------------------------- verify

inline RunReport run_verify(const Scenario& sc, const std::filesystem::path& out) {
  const Json& j = sc.raw;
  const std::string check = need_str(j, sc.kind, "check");
  Json summary = base_summary(sc);
  summary["check"] = check;
  std::vector<std::string> files;

  if (check == "lemma27") {
    GenericManifold manifold = parse_manifold(j, sc.kind);
    Cone cone = parse_cone(need(j, sc.kind, "cone"), "cone", manifold.d());
    std::optional<Cone> gp;
    if (j.contains("gamma_prime"))
      gp = parse_cone(j["gamma_prime"], "gamma_prime", manifold.d());
    double base_r = 0.05, t_r = 0.05;
    if (j.contains("boxes")) {
      base_r = opt_num(j["boxes"], "base", base_r);
      t_r = opt_num(j["boxes"], "t", t_r);
    }
    const std::size_t samples = sc.samples ? sc.samples : 100000;
    try {
      Wedge w{manifold, cone};
      Cone gamma_prime = gp ? *gp : cone.shrunk(0.5);
      WedgeSampleReport rep =
          lemma27_verify(w, gamma_prime, base_r, t_r, samples, sc.seed);
      CsvBuilder csv;
      csv.row({"samples", "violations", "worst_margin"});
      csv.row({std::to_string(rep.samples), std::to_string(rep.violations),
               fmt17(rep.worst_margin)});
      write_text(out / "verify.csv", csv.buf);
      files.push_back("verify.csv");
      summary["metrics"] = Json{{"samples", rep.samples},
                                {"violations", rep.violations},
                                {"worst_margin", rep.worst_margin}};
      const bool pass = rep.violations == 0;
      return finalize(std::move(summary), out, std::move(files), pass,
                      pass ? "PASS" : "FAIL");
    } catch (const ScenarioError&) {
      throw;
    } catch (const std::exception& e) {
      return module_failure(std::move(summary), out, std::move(files), e.what());
    }
  }

  if (check == "cone") {
    const std::size_t d = need_uint(j, sc.kind, "d");
    Cone inner = parse_cone(need(j, sc.kind, "inner"), "inner", d);
    Cone outer = parse_cone(need(j, sc.kind, "outer"), "outer", d);
    std::vector<double> mat = parse_matrix(need(j, sc.kind, "matrix"), "matrix", d);
    const std::size_t samples = sc.samples ? sc.samples : 400;
    const std::string require =
        j.contains("require") ? j["require"].get<std::string>() : "interior";
    if (require != "interior" && require != "strict")
      throw ScenarioError("scenario: field 'require' must be 'interior' or 'strict'");
    try {
      ConeContainmentReport rep =
          cone_containment_check(inner, mat, outer, samples, sc.seed);
      CsvBuilder csv;
      csv.row({"samples", "pass", "interior_pass", "min_angle_margin_deg",
               "min_interior_margin_deg"});
      csv.row({std::to_string(samples), rep.pass ? "1" : "0",
               rep.interior_pass ? "1" : "0", fmt17(rep.min_angle_margin_deg),
               fmt17(rep.min_interior_margin_deg)});
      write_text(out / "verify.csv", csv.buf);
      files.push_back("verify.csv");
      summary["metrics"] = Json{{"pass_strict", rep.pass},
                                {"pass_interior", rep.interior_pass},
                                {"min_angle_margin_deg", rep.min_angle_margin_deg},
                                {"min_interior_margin_deg",
                                 rep.min_interior_margin_deg}};
      const bool pass = require == "strict" ? rep.pass : rep.interior_pass;
      return finalize(std::move(summary), out, std::move(files), pass,
                      pass ? "PASS" : "FAIL");
    } catch (const ScenarioError&) {
      throw;
    } catch (const std::exception& e) {
      return module_failure(std::move(summary), out, std::move(files), e.what());
    }
  }

  if (check == "uniqueness") {
    GenericManifold manifold = parse_manifold(j, sc.kind);
    const std::size_t n = manifold.n(), d = manifold.d();
    Expression fe = parse_expr(j, sc.kind, "f", ambient_vars(n, d));
    Expression ge = parse_expr(j, sc.kind, "g", ambient_vars(n, d));
    const std::size_t grid_samples = opt_uint(j, "grid_samples", 25);
    const std::size_t base_index = opt_uint(j, "base_index", 0);
    try {
      // Formula-defined functions: the grid itself stays in range, so the
      // membership test is permissive.
      std::vector<double> radii;
      for (double r : manifold.base_radius()) radii.push_back(r);
      for (double r : manifold.param_radius()) radii.push_back(2.0 * r);
      AnalyticFunction f(fe.arity(), fe.evaluator(), DomainBox::polydisc(radii),
                         Provenance::BlackBox,
                         [](const ComplexVector&) { return true; });
      AnalyticFunction g(ge.arity(), ge.evaluator(), DomainBox::polydisc(radii),
                         Provenance::BlackBox,
                         [](const ComplexVector&) { return true; });

      std::mt19937_64 rng(sc.seed);
      std::uniform_real_distribution<double> u(-0.4, 0.4);
      std::vector<std::pair<ComplexVector, std::vector<double>>> grid;
      for (std::size_t k = 0; k < grid_samples; ++k) {
        ComplexVector z(n);
        for (std::size_t q = 0; q < n; ++q)
          z[q] = Complex(manifold.base_radius()[q] * u(rng),
                         manifold.base_radius()[q] * u(rng));
        std::vector<double> s(d);
        for (std::size_t q = 0; q < d; ++q)
          s[q] = manifold.param_radius()[q] * u(rng);
        grid.push_back({std::move(z), std::move(s)});
      }
      UniquenessReport rep = uniqueness_check(f, g, manifold, grid, base_index);

      CsvBuilder csv;
      csv.row({"max_im_gap", "base_gap", "max_diff", "status"});
      const std::string status = rep.status == UniquenessStatus::Pass   ? "PASS"
                                 : rep.status == UniquenessStatus::Fail ? "FAIL"
                                                                        : "NOT-APPLICABLE";
      csv.row({fmt17(rep.max_im_gap), fmt17(rep.base_gap), fmt17(rep.max_diff),
               status});
      write_text(out / "verify.csv", csv.buf);
      files.push_back("verify.csv");
      summary["metrics"] = Json{{"max_im_gap", rep.max_im_gap},
                                {"base_gap", rep.base_gap},
                                {"max_diff", rep.max_diff},
                                {"detail", rep.detail}};
      const bool pass = rep.status == UniquenessStatus::Pass;
      return finalize(std::move(summary), out, std::move(files), pass, status);
    } catch (const ScenarioError&) {
      throw;
    } catch (const std::exception& e) {
      return module_failure(std::move(summary), out, std::move(files), e.what());
    }
  }

  throw ScenarioError("scenario: unknown verify check '" + check +
                      "' (expected lemma27, cone or uniqueness)");
}

}  // namespace detail

/// Parses and validates a scenario document.  Throws ScenarioError on any
/// configuration problem; the caller maps that to exit code 2.
inline Scenario parse_scenario(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ScenarioError(std::string("scenario: JSON parse error: ") + e.what());
  }
  if (!j.is_object())
    throw ScenarioError("scenario: top level must be a JSON object");

  Scenario sc;
  sc.kind = detail::need_str(j, "?", "kind");
  static const std::set<std::string> kinds{"reflect", "harmonic", "curve",
                                           "eow",     "crextend", "verify"};
  if (!kinds.count(sc.kind))
    throw ScenarioError("scenario: unknown kind '" + sc.kind + "'");
  sc.raw = j;
  sc.nodes = detail::opt_uint(j, "nodes", 256);
  if (sc.nodes < 4) throw ScenarioError("scenario: field 'nodes' must be >= 4");
  sc.seed = static_cast<unsigned>(detail::opt_uint(j, "seed", 1));
  sc.samples = detail::opt_uint(j, "samples", 0);

  double tol_dflt = 1e-8, cr_dflt = 1e-6;
  if (sc.kind == "reflect") tol_dflt = 1e-10;
  if (sc.kind == "harmonic") {
    tol_dflt = 1e-12;
    cr_dflt = 1e-4;
  }
  if (sc.kind == "curve") tol_dflt = 1e-6;
  if (sc.kind == "eow") tol_dflt = 1e-10;
  sc.tol = detail::opt_num(j, "tol", tol_dflt);
  sc.cr_tol = detail::opt_num(j, "cr_tol", cr_dflt);

  // Presence checks for the kind-specific required fields, so a malformed
  // scenario fails before any computation starts.
  auto require = [&](std::initializer_list<const char*> fields) {
    for (const char* f : fields) detail::need(j, sc.kind, f);
  };
  if (sc.kind == "reflect") require({"f", "trace"});
  if (sc.kind == "harmonic") require({"v", "trace"});
  if (sc.kind == "curve") require({"f", "gamma", "trace"});
  if (sc.kind == "eow") require({"d", "g", "edge_radii", "ball", "cone"});
  if (sc.kind == "crextend")
    require({"n", "d", "phi", "base_radius", "param_radius", "cone", "f", "trace"});
  if (sc.kind == "verify") {
    const std::string check = detail::need_str(j, sc.kind, "check");
    if (check == "lemma27") require({"n", "d", "phi", "param_radius", "cone"});
    else if (check == "cone") require({"d", "inner", "outer", "matrix"});
    else if (check == "uniqueness")
      require({"n", "d", "phi", "param_radius", "f", "g"});
    else
      throw ScenarioError("scenario: unknown verify check '" + check +
                          "' (expected lemma27, cone or uniqueness)");
  }
  return sc;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ScenarioError("scenario: cannot read file " + path);
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  return parse_scenario(text);
}

/// Runs a scenario, writing its CSV grid(s) and summary.json under out_dir.
inline RunReport run_scenario(const Scenario& sc, const std::string& out_dir) {
  std::filesystem::path out(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec)
    throw ScenarioError("scenario: cannot create output directory " + out_dir +
                        ": " + ec.message());
  if (sc.kind == "reflect") return detail::run_reflect(sc, out);
  if (sc.kind == "harmonic") return detail::run_harmonic(sc, out);
  if (sc.kind == "curve") return detail::run_curve(sc, out);
  if (sc.kind == "eow") return detail::run_eow(sc, out);
  if (sc.kind == "crextend") return detail::run_crextend(sc, out);
  if (sc.kind == "verify") return detail::run_verify(sc, out);
  throw ScenarioError("scenario: unknown kind '" + sc.kind + "'");
}

}  // namespace reflexcr
