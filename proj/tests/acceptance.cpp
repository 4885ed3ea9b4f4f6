// Acceptance gates for the toolkit, one PASS/FAIL line per criterion.
// Every gate compares against an oracle that is independent of the code
// under test: closed forms, entire functions, or byte comparison.  Exit
// code is the number of failed criteria.

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "reflexcr/cr_extension.hpp"
#include "reflexcr/eow.hpp"
#include "reflexcr/reflection.hpp"
#include "reflexcr/scenario.hpp"
#include "reflexcr/series.hpp"
#include "reflexcr/wedge.hpp"

using namespace reflexcr;

namespace {

namespace fs = std::filesystem;

int g_failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %02d %s%s%s\n", ok ? "PASS" : "FAIL", id, name,
              detail.empty() ? "" : ": ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

const Complex kI(0.0, 1.0);

Complex draw_disc(std::mt19937_64& rng, double r, int half) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double rho = r * std::sqrt(u(rng));
  const double ang = half == 0  ? 2.0 * kPi * u(rng)
                     : half < 0 ? kPi + kPi * u(rng)
                                : kPi * u(rng);
  return std::polar(rho, ang);
}

// ---------------------------------------------------------------- 1 and 2

void criterion_reflection_oracle() {
  try {
    AnalyticFunction upper(
        1, [](const ComplexVector& p) { return std::exp(kI * p[0]); },
        DomainBox::upper_half_disc(1.0));
    HalfDiscFunction h(std::move(upper), sin_series());
    AnalyticFunction F = general_reflect(h);
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const Complex z = draw_disc(rng, 0.9, -1);
      worst = std::max(worst, std::abs(F(z) - std::exp(kI * z)));
    }
    report(1, "reflection with a sine trace reproduces exp(iz) below the axis",
           worst < 1e-10, "1000 points, max_abs_err=" + num(worst));
  } catch (const std::exception& e) {
    report(1, "reflection with a sine trace reproduces exp(iz) below the axis",
           false, e.what());
  }
}

void criterion_zero_trace_degeneracy() {
  try {
    auto make = [] {
      AnalyticFunction upper(
          1, [](const ComplexVector& p) { return std::exp(p[0]); },
          DomainBox::upper_half_disc(1.0));
      return HalfDiscFunction(std::move(upper), PowerSeries1D({0.0}));
    };
    AnalyticFunction Fg = general_reflect(make());
    AnalyticFunction Fc = classical_reflect(make());
    std::mt19937_64 rng(202);
    std::size_t mismatches = 0;
    for (int k = 0; k < 1000; ++k) {
      const Complex z = draw_disc(rng, 0.9, k % 2 ? 1 : -1);
      if (Fg(z) != Fc(z)) ++mismatches;
    }
    report(2, "a zero trace makes the general reflection exactly classical",
           mismatches == 0,
           "1000 points, mismatches=" + std::to_string(mismatches));
  } catch (const std::exception& e) {
    report(2, "a zero trace makes the general reflection exactly classical",
           false, e.what());
  }
}

// ---------------------------------------------------------------- 3 and 4

void criterion_harmonic_reflection() {
  try {
    auto v = [](double x, double y) { return x * x - y * y; };
    HarmonicExtension H = harmonic_reflect(v, PowerSeries1D({0.0, 0.0, 1.0}));
    auto Heval = [&H](double x, double y) { return H(x, y); };
    std::mt19937_64 rng(303);
    double worst = 0.0, worst_lap = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const Complex z = draw_disc(rng, 0.8, 0);
      const double x = z.real(), y = z.imag();
      worst = std::max(worst, std::abs(H(x, y) - v(x, y)));
      worst_lap = std::max(worst_lap, std::abs(discrete_laplacian(Heval, x, y)));
    }
    report(3, "harmonic reflection reproduces x^2-y^2 and stays harmonic",
           worst < 1e-12 && worst_lap < 1e-4,
           "max_abs_err=" + num(worst) + ", max_laplacian=" + num(worst_lap));
  } catch (const std::exception& e) {
    report(3, "harmonic reflection reproduces x^2-y^2 and stays harmonic",
           false, e.what());
  }
}

void criterion_curve_flattening() {
  try {
    AnalyticFunction f(
        1, [](const ComplexVector& p) { return std::exp(kI * p[0]); },
        DomainBox::disc(1.0));
    PowerSeries1D gamma({0.0, 0.0, 1.0});
    // Exact trace of Im f on the parabola: Im exp(i(x + i x^2)) equals
    // exp(-x^2) sin(x); its coefficients come from the series product.
    const std::size_t deg = 40;
    std::vector<double> ec(deg + 1, 0.0), sc(deg + 1, 0.0), tc(deg + 1, 0.0);
    double mfact = 1.0;
    for (std::size_t m = 0; 2 * m <= deg; ++m) {
      ec[2 * m] = (m % 2 == 0 ? 1.0 : -1.0) / mfact;
      mfact *= static_cast<double>(m + 1);
    }
    double ofact = 1.0;
    for (std::size_t k = 0; 2 * k + 1 <= deg; ++k) {
      sc[2 * k + 1] = (k % 2 == 0 ? 1.0 : -1.0) / ofact;
      ofact *= static_cast<double>(2 * k + 2) * static_cast<double>(2 * k + 3);
    }
    for (std::size_t a = 0; a <= deg; ++a)
      for (std::size_t b = 0; a + b <= deg; ++b) tc[a + b] += ec[a] * sc[b];
    AnalyticFunction F =
        curve_flatten_reflect(f, gamma, PowerSeries1D(std::move(tc)), 0.5);
    std::mt19937_64 rng(404);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const Complex z = draw_disc(rng, 0.2, 0);
      worst = std::max(worst, std::abs(F(z) - std::exp(kI * z)));
    }
    report(4, "flattening the parabola extends exp(iz) across the curve",
           worst < 1e-6, "radius 0.2, max_abs_err=" + num(worst));
  } catch (const std::exception& e) {
    report(4, "flattening the parabola extends exp(iz) across the curve",
           false, e.what());
  }
}

// ---------------------------------------------------------------- 5

void criterion_kernel_properties() {
  try {
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t sign_bad = 0, ident_bad = 0, bound_bad = 0;
    double sup = 0.0;
    // Corner probes reach the extremal value of the kernel bound.
    const Complex corners[] = {kI, -kI, Complex(1.0), Complex(-1.0)};
    for (Complex w : corners)
      for (Complex lam : corners)
        sup = std::max(sup, std::abs(mobius_phi(w, lam)));
    for (int k = 0; k < 100000; ++k) {
      Complex w, lam;
      if (k % 2 == 0) {  // unit-circle kernel parameter, arbitrary disc point
        w = draw_disc(rng, 1.0, 0);
        lam = std::polar(1.0, 2.0 * kPi * u(rng));
      } else {  // real base point, kernel parameter anywhere in the disc
        w = Complex(2.0 * u(rng) - 1.0, 0.0);
        lam = draw_disc(rng, 1.0, 0);
      }
      const Complex phi = mobius_phi(w, lam);
      const double im = phi.imag(), s = lam.imag();
      if (std::abs(s) <= 1e-12) {
        if (std::abs(im) > 1e-9) ++sign_bad;
      } else if ((s > 0.0) != (im > 0.0) || im == 0.0) {
        ++sign_bad;
      }
      if (mobius_phi(w, Complex(0.0)) != w) ++ident_bad;
      const double mag = std::abs(phi);
      sup = std::max(sup, mag);
      if (mag >= 6.0) ++bound_bad;
    }
    const double expected_sup = 3.0 + 2.0 * std::sqrt(2.0);
    const bool ok = sign_bad == 0 && ident_bad == 0 && bound_bad == 0 &&
                    sup < 6.0 && sup <= expected_sup + 1e-12;
    report(5, "kernel keeps sign, fixes the edge, and stays under its bound",
           ok,
           "100000 samples, sign_violations=" + std::to_string(sign_bad) +
               ", identity_violations=" + std::to_string(ident_bad) +
               ", observed_sup=" + num(sup) + " (bound 6)");
  } catch (const std::exception& e) {
    report(5, "kernel keeps sign, fixes the edge, and stays under its bound",
           false, e.what());
  }
}

// ---------------------------------------------------------------- 6 and 7

void criterion_averaging_mean_value() {
  const char* title = "circle averaging recovers entire functions across the edge";
  try {
    const Cone cone(2, {{1.0, 0.2}, {0.2, 1.0}});
    const EOWDomain dom({1.0, 1.0}, cone, 1.0);
    const NormalizationMap norm = NormalizationMap::from_cone(cone);

    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::vector<ComplexVector> model(1000);
    for (auto& wt : model)
      wt = {Complex(u(rng), u(rng)), Complex(u(rng), u(rng))};

    struct Case {
      const char* label;
      Complex (*f)(const ComplexVector&);
    };
    const Case cases[] = {
        {"w1*w2", [](const ComplexVector& w) { return w[0] * w[1]; }},
        {"w1^3+w2",
         [](const ComplexVector& w) { return w[0] * w[0] * w[0] + w[1]; }},
        {"exp(w1+w2)",
         [](const ComplexVector& w) { return std::exp(w[0] + w[1]); }},
    };

    bool ok = true;
    std::string detail;
    for (const Case& c : cases) {
      AnalyticFunction g = wedge_function(dom, c.f);
      double final_err = 0.0, prev = 0.0;
      bool decay = true;
      for (std::size_t nodes : {16u, 32u, 64u, 128u, 256u}) {
        EowExtension ext = eow_extend(g, dom, norm, nodes);
        double err = 0.0;
        for (const ComplexVector& wt : model) {
          const ComplexVector w = detail::apply_matrix(ext.forward, 2, wt);
          err = std::max(err, std::abs(ext.G(w) - c.f(w)));
        }
        if (nodes > 16 && !(err < 0.1 * prev || err < 1e-12)) decay = false;
        prev = err;
        final_err = err;
      }
      if (!(final_err < 1e-10 && decay)) ok = false;
      if (!detail.empty()) detail += ", ";
      detail += std::string(c.label) + " err=" + num(final_err) +
                (decay ? "" : " (no geometric decay)");
    }
    report(6, title, ok, detail);
  } catch (const std::exception& e) {
    report(6, title, false, e.what());
  }
}

void criterion_edge_agreement() {
  try {
    const Cone cone(2, {{1.0, 0.2}, {0.2, 1.0}});
    const EOWDomain dom({1.0, 1.0}, cone, 1.0);
    AnalyticFunction g = wedge_function(
        dom, [](const ComplexVector& w) { return std::exp(w[0] + w[1]); });
    EowExtension ext =
        eow_extend(g, dom, NormalizationMap::from_cone(cone), 256);
    std::mt19937_64 rng(707);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const ComplexVector wt = {Complex(u(rng), 0.0), Complex(u(rng), 0.0)};
      const ComplexVector w = detail::apply_matrix(ext.forward, 2, wt);
      worst = std::max(worst, std::abs(ext.G(w) - g(w)));
    }
    report(7, "the averaged extension agrees with its data on the real edge",
           worst < 1e-10, "1000 edge points, max_abs_err=" + num(worst));
  } catch (const std::exception& e) {
    report(7, "the averaged extension agrees with its data on the real edge",
           false, e.what());
  }
}

// ---------------------------------------------------------------- 8

void criterion_wedge_invariance_certificate() {
  try {
    MultiSeries phi = MultiSeries::from_terms(
        3, 16, {{{2, 0, 0}, 1.0}, {{0, 2, 0}, 1.0}, {{1, 0, 1}, 1.0}});
    GenericManifold m(1, 1, {phi}, {0.5}, {0.5});
    const Cone cone(1, {{1.0}});
    Wedge w{m, cone};
    WedgeSampleReport rep =
        lemma27_verify(w, cone.shrunk(0.5), 0.05, 0.05, 100000, 808);
    report(8, "the shrunk subcone keeps the curved wedge invariant",
           rep.violations == 0,
           "100000 samples, violations=" + std::to_string(rep.violations) +
               ", worst_margin=" + num(rep.worst_margin));
  } catch (const std::exception& e) {
    report(8, "the shrunk subcone keeps the curved wedge invariant", false,
           e.what());
  }
}

// ---------------------------------------------------------------- 9

WedgeFunction paraboloid_square_instance() {
  MultiSeries phi = MultiSeries::from_terms(
      3, 16, {{{2, 0, 0}, 1.0}, {{0, 2, 0}, 1.0}});
  GenericManifold m(1, 1, {phi}, {0.5}, {0.5});
  Wedge wedge{m, Cone(1, {{1.0}})};
  AnalyticFunction f = wedge_restriction(
      wedge, [](const ComplexVector& p) { return p[1] * p[1]; });
  MultiSeries trace = MultiSeries::from_terms(
      3, 16, {{{2, 0, 1}, 2.0}, {{0, 2, 1}, 2.0}});
  return WedgeFunction(wedge, std::move(f), std::move(trace));
}

void criterion_pipeline_closed_form() {
  const char* title = "the full pipeline reproduces the closed-form extension";
  try {
    WedgeFunction wf = paraboloid_square_instance();
    CrPipelineOptions opt;
    PipelineParts parts;
    ExtensionResult r = extend_cr_function(wf, opt, &parts);

    std::mt19937_64 rng(909);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::uniform_real_distribution<double> up(0.1, 0.5);
    double worst_f = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const Complex z(r.z_radius * u(rng), r.z_radius * u(rng));
      const int kind = k % 3;
      const double im = kind == 0 ? 0.0 : (kind == 1 ? up(rng) : -up(rng));
      const ComplexVector w =
          detail::apply_matrix(r.forward, 1, {Complex(u(rng), im)});
      const double n2 = std::norm(z);
      const Complex want = w[0] * w[0] - n2 * n2 + 2.0 * kI * w[0] * n2;
      worst_f = std::max(worst_f, std::abs(r.chart({z}, w) - want));
    }

    const GFunction& gf = *parts.reflected;
    double worst_g = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const double br = gf.boxes().base_radius;
      const Complex z(br * u(rng), br * u(rng));
      const int kind = k % 3;
      const double side = kind == 0 ? 0.0 : (kind == 1 ? 1.0 : -1.0);
      const Complex w(br * u(rng), side * up(rng) * gf.boxes().t_radius);
      const double n2 = std::norm(z);
      worst_g = std::max(worst_g, std::abs(gf({z}, {w}) - (w * w - n2 * n2)));
    }

    report(9, title, worst_f < 1e-9 && worst_g < 1e-10,
           "1000 points each, F_err=" + num(worst_f) +
               ", reflected_err=" + num(worst_g));
  } catch (const std::exception& e) {
    report(9, title, false, e.what());
  }
}

// ---------------------------------------------------------------- 10

// Complex-coefficient polynomial in the chart variables, carried as a
// (real, imaginary) pair of real series so the trace is exact algebra.
struct SeriesPair {
  MultiSeries re, im;
};

SeriesPair sp_mul(const SeriesPair& a, const SeriesPair& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

SeriesPair sp_axpy(const SeriesPair& acc, Complex c, const SeriesPair& t) {
  return {acc.re + (c.real() * t.re - c.imag() * t.im),
          acc.im + (c.real() * t.im + c.imag() * t.re)};
}

void criterion_pipeline_random_polynomials() {
  const char* title = "the pipeline matches 20 random polynomial oracles";
  try {
    const std::size_t deg_cap = 24;  // holds deg(F) <= 6 with deg(phi) <= 4
    auto mono = [&](std::vector<int> alpha) {
      return MultiSeries::from_terms(3, deg_cap, {{std::move(alpha), 1.0}});
    };
    const MultiSeries x = mono({1, 0, 0}), y = mono({0, 1, 0}),
                      s = mono({0, 0, 1}), zero(3, deg_cap);

    std::mt19937_64 rng(1010);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    std::size_t done = 0;
    for (int inst = 0; inst < 20; ++inst) {
      MultiSeries phi = zero;  // random graph, flat to first order
      for (int a = 0; a <= 4; ++a)
        for (int b = 0; a + b <= 4; ++b)
          for (int c = 0; a + b + c <= 4; ++c)
            if (a + b + c >= 2)
              phi = phi + MultiSeries::from_terms(
                              3, deg_cap, {{{a, b, c}, 0.25 * u(rng)}});

      std::vector<std::vector<Complex>> coef(7, std::vector<Complex>(7));
      for (int a = 0; a <= 6; ++a)
        for (int b = 0; a + b <= 6; ++b)
          coef[a][b] = 0.5 * Complex(u(rng), u(rng));

      // Trace as the imaginary part of F on the graph: substitute
      // z = x + iy and w = s + i phi into the polynomial.
      const SeriesPair Z{x, y}, W{s, phi};
      std::vector<SeriesPair> zp(7, {zero, zero}), wp(7, {zero, zero});
      zp[0] = {mono({0, 0, 0}), zero};
      wp[0] = zp[0];
      for (int k = 1; k <= 6; ++k) {
        zp[k] = sp_mul(zp[k - 1], Z);
        wp[k] = sp_mul(wp[k - 1], W);
      }
      SeriesPair F{zero, zero};
      for (int a = 0; a <= 6; ++a)
        for (int b = 0; a + b <= 6; ++b)
          F = sp_axpy(F, coef[a][b], sp_mul(zp[a], wp[b]));

      auto f0 = [coef](const ComplexVector& p) {
        Complex acc(0.0);
        Complex za(1.0);
        for (int a = 0; a <= 6; ++a) {
          Complex wb(1.0);
          for (int b = 0; a + b <= 6; ++b) {
            acc += coef[a][b] * za * wb;
            wb *= p[1];
          }
          za *= p[0];
        }
        return acc;
      };

      GenericManifold m(1, 1, {phi}, {0.5}, {0.5});
      Wedge wedge{m, Cone(1, {{1.0}})};
      WedgeFunction wf(wedge, wedge_restriction(wedge, f0), F.im);
      CrPipelineOptions opt;
      opt.seed = 3 + static_cast<unsigned>(inst);
      opt.oracle = f0;
      ExtensionResult r = extend_cr_function(wf, opt);
      worst = std::max(worst, r.report->max_abs_error);
      ++done;
    }
    report(10, title, done == 20 && worst < 1e-8,
           std::to_string(done) + " instances, worst_abs_err=" + num(worst));
  } catch (const std::exception& e) {
    report(10, title, false, e.what());
  }
}

// ---------------------------------------------------------------- 11

void criterion_flat_edge_consistency() {
  const char* title = "with no base directions the pipeline is plain reflection";
  try {
    GenericManifold flat(0, 1, {MultiSeries(1, 16)}, {}, {0.6});
    Wedge wedge{flat, Cone(1, {{1.0}})};
    AnalyticFunction f = wedge_restriction(
        wedge, [](const ComplexVector& p) { return std::exp(kI * p[0]); });
    std::vector<MultiSeries::Term> terms;
    double fact = 1.0;
    for (int k = 1; k <= 15; k += 2) {
      fact *= k > 1 ? static_cast<double>(k) * (k - 1) : 1.0;
      terms.push_back({{k}, (k % 4 == 1 ? 1.0 : -1.0) / fact});
    }
    WedgeFunction wf(wedge, std::move(f),
                     MultiSeries::from_terms(1, 16, terms));
    ExtensionResult r = extend_cr_function(wf);

    AnalyticFunction upper(
        1, [](const ComplexVector& p) { return std::exp(kI * p[0]); },
        DomainBox::upper_half_disc(0.55));
    AnalyticFunction F1 = general_reflect(HalfDiscFunction(std::move(upper),
                                                           sin_series()));
    std::mt19937_64 rng(1111);
    std::uniform_real_distribution<double> ux(-0.003, 0.003);
    std::uniform_real_distribution<double> uy(0.0005, 0.005);
    double worst = 0.0;
    for (int k = 0; k < 300; ++k) {
      const double sgn = k % 3 == 0 ? 0.0 : (k % 3 == 1 ? 1.0 : -1.0);
      const Complex w(ux(rng), sgn * uy(rng));
      worst = std::max(worst, std::abs(r.chart({}, {w}) - F1(w)));
    }
    report(11, title, worst < 1e-9, "300 points, max_abs_err=" + num(worst));
  } catch (const std::exception& e) {
    report(11, title, false, e.what());
  }
}

// ---------------------------------------------------------------- 12

void criterion_uniqueness_gates() {
  const char* title = "equal traces force equality; perturbed pairs are gated";
  try {
    MultiSeries phi = MultiSeries::from_terms(
        3, 16, {{{2, 0, 0}, 1.0}, {{0, 2, 0}, 1.0}});
    GenericManifold m(1, 1, {phi}, {0.5}, {0.5});
    auto formula = [](AnalyticFunction::Evaluator e) {
      return AnalyticFunction(2, std::move(e), DomainBox::polydisc({0.5, 1.0}),
                              Provenance::BlackBox,
                              [](const ComplexVector&) { return true; });
    };
    AnalyticFunction f =
        formula([](const ComplexVector& p) { return p[1] * p[1] + p[0]; });
    AnalyticFunction same =
        formula([](const ComplexVector& p) { return p[0] + p[1] * p[1]; });
    AnalyticFunction shifted = formula(
        [](const ComplexVector& p) { return p[1] * p[1] + p[0] + 0.05; });
    AnalyticFunction tilted = formula([](const ComplexVector& p) {
      return p[1] * p[1] + p[0] + Complex(0.0, 1e-3);
    });

    std::mt19937_64 rng(1212);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    std::vector<std::pair<ComplexVector, std::vector<double>>> grid;
    for (int k = 0; k < 25; ++k)
      grid.push_back({{Complex(u(rng), u(rng))}, {u(rng)}});

    UniquenessReport eq = uniqueness_check(f, same, m, grid);
    UniquenessReport off = uniqueness_check(f, shifted, m, grid);
    UniquenessReport imo = uniqueness_check(f, tilted, m, grid);
    const bool ok = eq.status == UniquenessStatus::Pass &&
                    eq.max_diff < 1e-10 &&
                    off.status == UniquenessStatus::NotApplicable &&
                    imo.status == UniquenessStatus::NotApplicable;
    report(12, title, ok,
           "equal max_diff=" + num(eq.max_diff) +
               ", shifted base_gap=" + num(off.base_gap) +
               ", tilted im_gap=" + num(imo.max_im_gap));
  } catch (const std::exception& e) {
    report(12, title, false, e.what());
  }
}

// ---------------------------------------------------------------- 13

void criterion_rigid_target_traces() {
  const char* title = "target-graph traces drive the pipeline to closed forms";
  try {
    RigidManifold target(
        1, 1,
        {MultiSeries::from_terms(2, 8, {{{2, 0}, 1.0}, {{0, 2}, 1.0}})});
    MultiSeries phi = MultiSeries::from_terms(
        3, 16, {{{2, 0, 0}, 1.0}, {{0, 2, 0}, 1.0}});
    GenericManifold m(1, 1, {phi}, {0.5}, {0.5});
    Wedge wedge{m, Cone(1, {{1.0}})};

    double worst = 0.0;
    for (double c : {1.0, 0.7}) {
      // Base component H1 = c z of a map into the target graph; the trace
      // of the transverse component comes from composing the target graph
      // with (Re H1, Im H1), and its extension has the closed form c^2 w.
      MultiSeries re1 =
          MultiSeries::from_terms(3, 16, {{{1, 0, 0}, c}});
      MultiSeries im1 =
          MultiSeries::from_terms(3, 16, {{{0, 1, 0}, c}});
      std::vector<MultiSeries> traces =
          rigid_target_traces({{re1, im1}}, target);
      const double c2 = c * c;
      AnalyticFunction f = wedge_restriction(
          wedge, [c2](const ComplexVector& p) { return c2 * p[1]; });
      WedgeFunction wf(wedge, std::move(f), traces.at(0));
      CrPipelineOptions opt;
      opt.oracle = [c2](const ComplexVector& p) { return c2 * p[1]; };
      ExtensionResult r = extend_cr_function(wf, opt);
      worst = std::max(worst, r.report->max_abs_error);
    }
    report(13, title, worst < 1e-8, "2 maps, worst_abs_err=" + num(worst));
  } catch (const std::exception& e) {
    report(13, title, false, e.what());
  }
}

// ---------------------------------------------------------------- 14

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
}

void criterion_determinism(const fs::path& scenario_dir) {
  const char* title = "every scenario rerun is byte-identical";
  try {
    std::vector<fs::path> docs;
    for (const auto& e : fs::directory_iterator(scenario_dir))
      if (e.path().extension() == ".json") docs.push_back(e.path());
    std::sort(docs.begin(), docs.end());
    if (docs.empty()) {
      report(14, title, false,
             "no scenario files under " + scenario_dir.string());
      return;
    }
    const fs::path base = fs::temp_directory_path() / "reflexcr_acceptance";
    fs::remove_all(base);
    std::size_t checked = 0, different = 0;
    for (const fs::path& doc : docs) {
      Scenario sc = load_scenario_file(doc.string());
      const fs::path a = base / (doc.stem().string() + "_a");
      const fs::path b = base / (doc.stem().string() + "_b");
      RunReport ra = run_scenario(sc, a.string());
      RunReport rb = run_scenario(sc, b.string());
      bool same = ra.files == rb.files &&
                  read_file(a / "summary.json") == read_file(b / "summary.json");
      for (const std::string& f : ra.files)
        if (read_file(a / f) != read_file(b / f)) same = false;
      if (!same) ++different;
      ++checked;
    }
    report(14, title, different == 0,
           std::to_string(checked) + " scenarios, " +
               std::to_string(different) + " with differing reruns");
  } catch (const std::exception& e) {
    report(14, title, false, e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path scenario_dir = argc > 1 ? argv[1] : "scenarios";
  criterion_reflection_oracle();
  criterion_zero_trace_degeneracy();
  criterion_harmonic_reflection();
  criterion_curve_flattening();
  criterion_kernel_properties();
  criterion_averaging_mean_value();
  criterion_edge_agreement();
  criterion_wedge_invariance_certificate();
  criterion_pipeline_closed_form();
  criterion_pipeline_random_polynomials();
  criterion_flat_edge_consistency();
  criterion_uniqueness_gates();
  criterion_rigid_target_traces();
  criterion_determinism(scenario_dir);
  std::printf("%d of 14 criteria failed\n", g_failures);
  return g_failures;
}
