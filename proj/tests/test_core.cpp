#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <random>

#include "reflexcr/core.hpp"

using namespace reflexcr;

namespace {

AnalyticFunction make_exp(double r = 4.0) {
  return AnalyticFunction(
      1, [](const ComplexVector& p) { return std::exp(p[0]); },
      DomainBox::disc(r));
}

std::vector<ComplexVector> random_points_1d(std::size_t n, double r,
                                            unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-r, r);
  std::vector<ComplexVector> pts;
  pts.reserve(n);
  while (pts.size() < n) {
    Complex z(u(rng), u(rng));
    if (std::abs(z) <= r) pts.push_back({z});
  }
  return pts;
}

}  // namespace

TEST_CASE("DomainBox membership uses a closed tolerance") {
  DomainBox d = DomainBox::disc(1.0);
  CHECK(d.contains({Complex(1.0, 0.0)}));
  CHECK(d.contains({Complex(1.0 + 0.5e-12, 0.0)}));
  CHECK_FALSE(d.contains({Complex(1.0 + 1e-11, 0.0)}));
  CHECK(d.contains({Complex(0.3, -0.4)}));
  CHECK_FALSE(d.contains({Complex(0.9, 0.9)}));

  DomainBox up = DomainBox::upper_half_disc(1.0);
  CHECK(up.contains({Complex(0.5, 0.25)}));
  CHECK(up.contains({Complex(0.5, 0.0)}));          // boundary axis point
  CHECK(up.contains({Complex(0.5, -0.5e-12)}));     // within tolerance
  CHECK_FALSE(up.contains({Complex(0.5, -1e-6)}));

  DomainBox pd = DomainBox::polydisc(2, 1.0);
  CHECK(pd.contains({Complex(0.5, 0.5), Complex(-0.5, 0.0)}));
  CHECK_FALSE(pd.contains({Complex(0.5, 0.5)}));    // wrong arity
}

TEST_CASE("DomainBox rejects degenerate construction") {
  CHECK_THROWS_AS(DomainBox({Complex(0.0)}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(DomainBox({Complex(0.0)}, {-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(DomainBox({Complex(0.0), Complex(0.0)}, {1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(DomainBox({}, {}), std::invalid_argument);
}

TEST_CASE("AnalyticFunction evaluates inside and rejects outside") {
  AnalyticFunction f = make_exp(2.0);
  Complex v = f(Complex(0.0, 1.0));
  CHECK(std::abs(v - Complex(std::cos(1.0), std::sin(1.0))) < 1e-15);
  CHECK_THROWS_AS(f(Complex(3.0, 0.0)), std::domain_error);
  CHECK_THROWS_AS(f(ComplexVector{Complex(0.0), Complex(0.0)}),
                  std::domain_error);
}

TEST_CASE("AnalyticFunction rejects non-finite inputs and outputs") {
  AnalyticFunction f = make_exp(2.0);
  const double inf = std::numeric_limits<double>::infinity();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(f(Complex(inf, 0.0)), std::domain_error);
  CHECK_THROWS_AS(f(Complex(0.0, nan)), std::domain_error);

  AnalyticFunction bad(
      1, [](const ComplexVector&) { return Complex(1.0 / 0.0, 0.0); },
      DomainBox::disc(1.0));
  CHECK_THROWS_AS(bad(Complex(0.0)), std::domain_error);
}

TEST_CASE("Membership predicate overrides the bounding box") {
  // Annulus 0.5 <= |z| <= 1 inside the unit-disc bounding box.
  AnalyticFunction f(
      1, [](const ComplexVector& p) { return p[0]; }, DomainBox::disc(1.0),
      Provenance::BlackBox, [](const ComplexVector& p) {
        double a = std::abs(p[0]);
        return a >= 0.5 - kDomainTol && a <= 1.0 + kDomainTol;
      });
  CHECK(f.in_domain({Complex(0.75, 0.0)}));
  CHECK_FALSE(f.in_domain({Complex(0.1, 0.0)}));
  CHECK_THROWS_AS(f(Complex(0.1, 0.0)), std::domain_error);
}

TEST_CASE("GridSample rejects duplicates and length mismatch") {
  std::vector<ComplexVector> pts{{Complex(0.0)}, {Complex(1.0)}, {Complex(0.0)}};
  std::vector<Complex> vals{Complex(0.0), Complex(1.0), Complex(2.0)};
  CHECK_THROWS_AS(GridSample(pts, vals), std::invalid_argument);
  CHECK_THROWS_AS(GridSample({{Complex(0.0)}}, {}), std::invalid_argument);
  GridSample ok({{Complex(0.0)}, {Complex(1.0)}}, {Complex(2.0), Complex(3.0)});
  CHECK(ok.size() == 2);
}

TEST_CASE("evaluate_on_grid matches serial evaluation for any thread cap") {
  AnalyticFunction f = make_exp(3.0);
  auto pts = random_points_1d(500, 2.5, 42);

  std::vector<Complex> serial(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) serial[i] = f(pts[i]);

  GridSample g = evaluate_on_grid(f, pts);
  REQUIRE(g.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    // Bitwise equality: scheduling must not affect values.
    CHECK(g.values[i].real() == serial[i].real());
    CHECK(g.values[i].imag() == serial[i].imag());
  }
}

TEST_CASE("evaluate_on_grid reports the smallest failing index") {
  AnalyticFunction f = make_exp(1.0);
  std::vector<ComplexVector> pts;
  for (int i = 0; i < 200; ++i) pts.push_back({Complex(i / 1000.0, 0.0)});
  pts[7] = {Complex(5.0, 0.0)};    // outside
  pts[150] = {Complex(6.0, 0.0)};  // also outside, later
  try {
    evaluate_on_grid(f, pts);
    FAIL("expected domain_error");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("5") != std::string::npos);
  }
}

TEST_CASE("cr_residual vanishes for holomorphic functions") {
  AnalyticFunction f = make_exp(3.0);
  CHECK(cr_residual(f, {Complex(0.5, 0.5)}) < 1e-9);
  CHECK(cr_residual(f, {Complex(-1.0, 0.25)}) < 1e-9);

  AnalyticFunction poly(
      2,
      [](const ComplexVector& p) {
        return p[0] * p[0] * p[1] + Complex(0.0, 3.0) * p[1];
      },
      DomainBox::polydisc(2, 2.0));
  CHECK(cr_residual(poly, {Complex(0.3, 0.1), Complex(-0.2, 0.4)}) < 1e-9);
}

TEST_CASE("cr_residual detects antiholomorphic dependence") {
  // f(z) = conj(z): df/dzbar = 1, so the residual is ~1.
  AnalyticFunction f(
      1, [](const ComplexVector& p) { return std::conj(p[0]); },
      DomainBox::disc(2.0));
  double r = cr_residual(f, {Complex(0.5, 0.25)});
  CHECK(r == Catch::Approx(1.0).margin(1e-8));

  // f(z) = |z|^2 has df/dzbar = z.
  AnalyticFunction g(
      1, [](const ComplexVector& p) { return Complex(std::norm(p[0]), 0.0); },
      DomainBox::disc(2.0));
  double r2 = cr_residual(g, {Complex(0.6, 0.3)});
  CHECK(r2 == Catch::Approx(std::abs(Complex(0.6, 0.3))).margin(1e-8));
}

TEST_CASE("compare records max error and residual") {
  AnalyticFunction f = make_exp(3.0);
  AnalyticFunction off(
      1, [](const ComplexVector& p) { return std::exp(p[0]) + 1e-7; },
      DomainBox::disc(3.0));
  auto pts = random_points_1d(50, 2.0, 7);
  ResidualReport rep = compare(off, f, pts);
  CHECK(rep.max_abs_error == Catch::Approx(1e-7).epsilon(1e-6));
  CHECK(rep.max_cr_residual < 1e-9);
  REQUIRE(rep.oracle_values.has_value());
  CHECK(rep.oracle_values->size() == pts.size());
}
