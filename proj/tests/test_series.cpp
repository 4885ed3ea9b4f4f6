#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "reflexcr/series.hpp"

using namespace reflexcr;

TEST_CASE("Horner evaluation matches closed forms") {
  PowerSeries1D e = exp_series();
  CHECK(std::abs(e(Complex(1.0, 0.0)) - Complex(std::exp(1.0), 0.0)) < 1e-14);
  CHECK(std::abs(e(Complex(0.0, 1.0)) - Complex(std::cos(1.0), std::sin(1.0))) <
        1e-14);

  // sin(i) = i sinh(1); the imaginary part is the frozen value.
  PowerSeries1D s = sin_series();
  Complex si = s(Complex(0.0, 1.0));
  CHECK(std::abs(si.real()) < 1e-15);
  CHECK(si.imag() == Catch::Approx(1.1752011936438014).epsilon(1e-15));

  PowerSeries1D c = cos_series();
  CHECK(std::abs(c(Complex(0.7, 0.0)) - Complex(std::cos(0.7), 0.0)) < 1e-15);
}

TEST_CASE("Series arithmetic") {
  PowerSeries1D one({1.0});
  PowerSeries1D x = PowerSeries1D::identity();
  PowerSeries1D p = one + x;              // 1 + x
  PowerSeries1D q = one - x;              // 1 - x
  PowerSeries1D prod = mul(p, q);
  CHECK(prod.coeff(0) == 1.0);
  CHECK(prod.coeff(1) == 0.0);
  CHECK(prod.coeff(2) == -1.0);

  // (1 - x) * geometric = 1 up to the truncation order.
  PowerSeries1D geo(std::vector<double>(kSeriesOrder + 1, 1.0));
  PowerSeries1D g = mul(q, geo, kSeriesOrder);
  CHECK(g.coeff(0) == 1.0);
  for (std::size_t n = 1; n < kSeriesOrder; ++n) CHECK(g.coeff(n) == 0.0);

  PowerSeries1D scaled = 3.0 * x;
  CHECK(scaled.coeff(1) == 3.0);

  PowerSeries1D de = exp_series().derivative();
  for (std::size_t n = 0; n + 1 <= kSeriesOrder; ++n)
    CHECK(de.coeff(n) == Catch::Approx(exp_series().coeff(n)).margin(1e-300));
}

TEST_CASE("Composition is evaluation-consistent") {
  PowerSeries1D s = sin_series();
  PowerSeries1D two_z({0.0, 2.0});
  PowerSeries1D s2 = compose(s, two_z);
  CHECK(std::abs(s2(Complex(0.3, 0.0)) - Complex(std::sin(0.6), 0.0)) < 1e-15);

  // Inner series with constant term is rejected.
  CHECK_THROWS_AS(compose(s, PowerSeries1D({1.0, 1.0})), std::invalid_argument);
}

TEST_CASE("Reversion of x + x^2 gives signed Catalan numbers") {
  PowerSeries1D p({0.0, 1.0, 1.0});
  PowerSeries1D q = revert(p, 8);
  // Exact inverse (-1 + sqrt(1 + 4y)) / 2 expanded independently.
  const double expected[] = {0.0, 1.0, -1.0, 2.0, -5.0, 14.0, -42.0, 132.0, -429.0};
  for (std::size_t n = 0; n <= 8; ++n)
    CHECK(q.coeff(n) == Catch::Approx(expected[n]).margin(1e-9));
}

TEST_CASE("Reversion round-trips and reproduces arcsin") {
  PowerSeries1D s = sin_series(32);
  PowerSeries1D a = revert(s, 32);
  PowerSeries1D id = compose(s.truncated(32), a, 32);
  CHECK(id.coeff(1) == Catch::Approx(1.0).margin(1e-13));
  for (std::size_t n = 0; n <= 32; ++n)
    if (n != 1) CHECK(std::abs(id.coeff(n)) < 1e-12);

  // arcsin y = y + y^3/6 + 3 y^5/40 + 15 y^7/336.
  CHECK(a.coeff(3) == Catch::Approx(1.0 / 6.0).margin(1e-14));
  CHECK(a.coeff(5) == Catch::Approx(3.0 / 40.0).margin(1e-14));
  CHECK(a.coeff(7) == Catch::Approx(15.0 / 336.0).margin(1e-14));

  CHECK_THROWS_AS(revert(PowerSeries1D({1.0, 1.0})), std::invalid_argument);
  CHECK_THROWS_AS(revert(PowerSeries1D({0.0, 0.0, 1.0})), std::invalid_argument);
}

TEST_CASE("Radius estimation by root test") {
  // Geometric series: radius 1.
  PowerSeries1D geo(std::vector<double>(kSeriesOrder + 1, 1.0));
  double r = estimate_radius(geo);
  CHECK(r > 0.85);
  CHECK(r < 0.95);

  // Entire series: estimate far exceeds any finite target.
  CHECK(estimate_radius(exp_series()) >= 10.0);
  CHECK(estimate_radius(sin_series()) >= 10.0);

  // Scaled geometric sum (z/2)^n: radius 2.
  std::vector<double> half(kSeriesOrder + 1);
  for (std::size_t n = 0; n <= kSeriesOrder; ++n) half[n] = std::pow(0.5, n);
  double r2 = estimate_radius(PowerSeries1D(std::move(half)));
  CHECK(r2 > 1.7);
  CHECK(r2 < 1.9);

  // Too little data to extrapolate from.
  CHECK_THROWS_AS(estimate_radius(PowerSeries1D({0.0, 1.0, 1.0})),
                  std::invalid_argument);

  // Zero tail: nothing beyond the declared radius can be inferred.
  std::vector<double> poly(kSeriesOrder + 1, 0.0);
  for (std::size_t n = 0; n < 20; ++n) poly[n] = 1.0;
  CHECK(estimate_radius(PowerSeries1D(std::move(poly), 2.5)) == 2.5);
}

TEST_CASE("Series evaluation enforces the declared radius") {
  PowerSeries1D s({1.0, 1.0}, 1.0);
  CHECK_NOTHROW(s(Complex(0.5, 0.5)));
  CHECK_THROWS_AS(s(Complex(1.5, 0.0)), std::domain_error);
}

TEST_CASE("Monomial rank agrees with enumeration order") {
  for (auto [m, d] : {std::pair<std::size_t, std::size_t>{1, 8},
                      {2, 5},
                      {3, 7},
                      {6, 4}}) {
    // Touch every index through the public alpha accessor and re-rank it.
    MultiSeries probe(m, d);
    for (std::size_t i = 0;; ++i) {
      if (i >= probe.coeffs().size()) break;
      probe.set_coeff(probe.alpha(i), static_cast<double>(i) + 1.0);
      CHECK(probe.coeffs()[i] == static_cast<double>(i) + 1.0);
    }
  }
  // Count of monomials in 2 vars up to degree 3 is C(5,2) = 10.
  CHECK(MultiSeries(2, 3).coeffs().size() == 10);
  CHECK(MultiSeries(3, 16).coeffs().size() == 969);
}

TEST_CASE("Multivariate evaluation and arithmetic") {
  // (x + y)^2 = x^2 + 2xy + y^2.
  MultiSeries sq = MultiSeries::from_terms(
      2, 4, {{{2, 0}, 1.0}, {{1, 1}, 2.0}, {{0, 2}, 1.0}});
  Complex x(0.3, 0.0), y(0.5, 0.1);
  Complex v = sq.eval({x, y});
  Complex want = (x + y) * (x + y);
  CHECK(std::abs(v - want) < 1e-15);

  MultiSeries xs = MultiSeries::from_terms(2, 4, {{{1, 0}, 1.0}});
  MultiSeries ys = MultiSeries::from_terms(2, 4, {{{0, 1}, 1.0}});
  MultiSeries p = (xs + ys) * (xs - ys);
  CHECK(p.coeff({2, 0}) == 1.0);
  CHECK(p.coeff({0, 2}) == -1.0);
  CHECK(p.coeff({1, 1}) == 0.0);

  // Degree-bound truncation drops the overflow term of x^2 * x^2.
  MultiSeries x3 = MultiSeries::from_terms(1, 3, {{{2}, 1.0}});
  MultiSeries t = x3 * x3;
  CHECK(t.is_zero());

  MultiSeries d = sq.derivative(0);  // 2x + 2y
  CHECK(d.coeff({1, 0}) == 2.0);
  CHECK(d.coeff({0, 1}) == 2.0);
  CHECK(d.coeff({2, 0}) == 0.0);
}

TEST_CASE("Multivariate composition substitutes per variable") {
  // g(u, v) = u^2 + v with u = x + y, v = x^2: result (x+y)^2 + x^2.
  MultiSeries g = MultiSeries::from_terms(2, 2, {{{2, 0}, 1.0}, {{0, 1}, 1.0}});
  MultiSeries u = MultiSeries::from_terms(2, 4, {{{1, 0}, 1.0}, {{0, 1}, 1.0}});
  MultiSeries v = MultiSeries::from_terms(2, 4, {{{2, 0}, 1.0}});
  MultiSeries r = g.compose({u, v});
  CHECK(r.coeff({2, 0}) == 2.0);
  CHECK(r.coeff({1, 1}) == 2.0);
  CHECK(r.coeff({0, 2}) == 1.0);

  // Constant terms in the substituted series are legal polynomial data.
  MultiSeries shifted = MultiSeries::from_terms(2, 4, {{{0, 0}, 1.0}, {{1, 0}, 1.0}});
  MultiSeries r2 = g.compose({shifted, v});
  CHECK(r2.coeff({0, 0}) == 1.0);  // (1 + x)^2 + x^2 has constant 1
  CHECK(r2.coeff({1, 0}) == 2.0);
  CHECK(r2.coeff({2, 0}) == 2.0);
}

TEST_CASE("Real coefficients commute with conjugation") {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> uc(-2.0, 2.0);
  for (int rep = 0; rep < 20; ++rep) {
    MultiSeries s(3, 5);
    for (std::size_t i = 0; i < s.coeffs().size(); ++i)
      s.set_coeff(s.alpha(i), uc(rng));
    ComplexVector args{Complex(uc(rng), uc(rng)), Complex(uc(rng), uc(rng)),
                       Complex(uc(rng), uc(rng))};
    ComplexVector conj_args{std::conj(args[0]), std::conj(args[1]),
                            std::conj(args[2])};
    Complex a = s.eval(args);
    Complex b = s.eval(conj_args);
    CHECK(std::abs(b - std::conj(a)) < 1e-11 * (1.0 + std::abs(a)));
  }
}

TEST_CASE("Complexified series become analytic functions") {
  AnalyticFunction f = complexify(sin_series(), 2.0);
  CHECK(std::abs(f(Complex(0.5, 0.25)) - std::sin(Complex(0.5, 0.25))) < 1e-14);
  CHECK_THROWS_AS(f(Complex(3.0, 0.0)), std::domain_error);
  CHECK(cr_residual(f, {Complex(0.4, -0.3)}) < 1e-9);

  // Declared radius caps the usable disc.
  PowerSeries1D narrow({0.0, 1.0}, 0.5);
  CHECK_THROWS_AS(complexify(narrow, 1.0), std::invalid_argument);

  // Partial complexification: slot 0 stays real.
  MultiSeries bi = MultiSeries::from_terms(2, 3, {{{1, 1}, 1.0}});
  AnalyticFunction g = complexify(bi, {1.0, 1.0}, {false, true});
  CHECK(std::abs(g({Complex(0.5, 0.0), Complex(0.2, 0.3)}) -
                 Complex(0.1, 0.15)) < 1e-15);
  CHECK_THROWS_AS(g({Complex(0.5, 0.1), Complex(0.2, 0.3)}), std::domain_error);
}
