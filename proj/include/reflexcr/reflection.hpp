#pragma once

// One-variable reflection operators: classical Schwarz reflection across a
// segment, its generalization to nonvanishing real-analytic imaginary
// trace, the harmonic counterpart, and reflection across a real-analytic
// curve via a flattening chart.

#include <cmath>
#include <functional>

#include "reflexcr/core.hpp"
#include "reflexcr/linalg.hpp"
#include "reflexcr/series.hpp"

namespace reflexcr {

/// Holomorphic function on the upper half disc D+ together with the
/// real-analytic series of its imaginary part on the axis segment.
/// Construction cross-checks the two on axis samples.
class HalfDiscFunction {
 public:
  HalfDiscFunction(AnalyticFunction f, PowerSeries1D trace)
      : f_(std::move(f)), trace_(std::move(trace)) {
    if (f_.arity() != 1)
      throw std::invalid_argument("HalfDiscFunction: needs a one-variable function");
    if (std::abs(f_.domain().center()[0]) > kDomainTol)
      throw std::invalid_argument("HalfDiscFunction: domain must be centred at 0");
    const double span = 0.95 * std::min(domain_radius(), trace_radius());
    for (int k = -20; k <= 20; ++k) {
      const double x = span * k / 20.0;
      const Complex fx = f_(Complex(x, 0.0));
      const double vx = trace_(Complex(x, 0.0)).real();
      if (std::abs(fx.imag() - vx) > 1e-8) {
        throw std::invalid_argument(
            "HalfDiscFunction: imaginary part disagrees with trace at x=" +
            std::to_string(x));
      }
    }
  }

  const AnalyticFunction& f() const { return f_; }
  const PowerSeries1D& trace() const { return trace_; }
  double domain_radius() const { return f_.domain().radii()[0]; }

  double trace_radius() const {
    return std::min(trace_.radius(), std::numeric_limits<double>::max());
  }

  bool trace_is_zero() const { return trace_.nonzero_count() == 0; }

 private:
  AnalyticFunction f_;
  PowerSeries1D trace_;
};

namespace detail {

/// Usable reflection radius: declared trace radius capped by the upper
/// domain (the mirrored point conj(z) must stay inside it) and, when the
/// trace has enough tail to extrapolate from, by the root-test estimate.
inline double reflection_radius(const HalfDiscFunction& h) {
  double r = std::min(h.trace_radius(), h.domain_radius());
  if (h.trace().nonzero_count() >= 16)
    r = std::min(r, estimate_radius(h.trace()));
  return r;
}

/// Glued evaluator shared by the classical and general operators.  The
/// classical case omits the trace term entirely so that a zero trace gives
/// the same arithmetic, not just the same values.
inline AnalyticFunction build_reflection(const HalfDiscFunction& h,
                                         bool with_trace_term) {
  const double r = reflection_radius(h);
  const AnalyticFunction f = h.f();
  const PowerSeries1D trace = h.trace();
  const double rho = h.domain_radius();
  auto member = [f, r](const ComplexVector& p) {
    const Complex z = p[0];
    if (z.imag() >= 0.0) return f.in_domain(p) || std::abs(z) <= r + kDomainTol;
    return std::abs(z) <= r + kDomainTol;
  };
  auto eval = [f, trace, r, with_trace_term](const ComplexVector& p) {
    const Complex z = p[0];
    // Axis points take the upper-side formula; both sides agree there.
    if (z.imag() >= 0.0) return f(z);
    Complex out = std::conj(f(std::conj(z)));
    if (with_trace_term) out += Complex(0.0, 2.0) * trace(z);
    return out;
  };
  return AnalyticFunction(1, std::move(eval),
                          DomainBox::disc(std::max(rho, r)),
                          Provenance::ConstructedExtension, std::move(member));
}

}  // namespace detail

/// Reflection across the axis segment when the function is real there.
/// Extends to the mirror image of D+ by F(z) = conj(f(conj z)).
inline AnalyticFunction classical_reflect(const HalfDiscFunction& h) {
  if (!h.trace_is_zero())
    throw std::invalid_argument(
        "classical_reflect: trace must vanish identically; use general_reflect "
        "for a nonzero imaginary trace");
  return detail::build_reflection(h, false);
}

/// Reflection with nonvanishing imaginary trace v: below the axis
/// F(z) = conj(f(conj z)) + 2i v(z) with v the complexified trace.
/// Defined on D+ together with the disc of the usable reflection radius.
inline AnalyticFunction general_reflect(const HalfDiscFunction& h) {
  return detail::build_reflection(h, !h.trace_is_zero());
}

/// Real-valued harmonic extension across the axis.
struct HarmonicExtension {
  std::function<double(double, double)> eval;
  double upper_radius = 0.0;
  double lower_radius = 0.0;

  bool contains(double x, double y) const {
    const double a = std::hypot(x, y);
    if (y >= 0.0) return a <= upper_radius + kDomainTol || a <= lower_radius + kDomainTol;
    return a <= lower_radius + kDomainTol;
  }

  double operator()(double x, double y) const {
    if (!contains(x, y))
      throw std::domain_error("HarmonicExtension: point outside domain");
    double v = eval(x, y);
    if (!is_finite(v))
      throw std::domain_error("HarmonicExtension: non-finite value");
    return v;
  }
};

/// Five-point Laplacian, the harmonicity spot check used at construction
/// and in tests.
inline double discrete_laplacian(const std::function<double(double, double)>& v,
                                 double x, double y, double h = 1e-3) {
  return (v(x + h, y) + v(x - h, y) + v(x, y + h) + v(x, y - h) - 4.0 * v(x, y)) /
         (h * h);
}

/// Harmonic reflection: below the axis V(x,y) = 2 Re(v_c(z)) - v(x,-y),
/// where v_c is the complexified axis trace.  The input is spot-checked for
/// harmonicity and for agreement with the trace on the axis.
inline HarmonicExtension harmonic_reflect(
    std::function<double(double, double)> v, const PowerSeries1D& trace,
    double upper_radius = 1.0) {
  if (!(upper_radius > 0.0))
    throw std::invalid_argument("harmonic_reflect: radius must be positive");
  double r = std::min(trace.radius(), upper_radius);
  if (trace.nonzero_count() >= 16) r = std::min(r, estimate_radius(trace));

  const double h = 1e-3;
  for (int k = 0; k < 8; ++k) {
    const double ang = 0.3 + 0.35 * k;
    const double x = 0.6 * upper_radius * std::cos(ang);
    const double y = 0.1 * upper_radius + 0.5 * upper_radius *
                                              std::abs(std::sin(ang));
    const double lap = discrete_laplacian(v, x, y, h);
    if (std::abs(lap) > 1e-4)
      throw std::invalid_argument(
          "harmonic_reflect: input fails the harmonicity check, Laplacian " +
          std::to_string(lap) + " at (" + std::to_string(x) + ", " +
          std::to_string(y) + ")");
  }
  const double span = 0.95 * r;
  for (int k = -20; k <= 20; ++k) {
    const double x = span * k / 20.0;
    const double want = trace(Complex(x, 0.0)).real();
    if (std::abs(v(x, 0.0) - want) > 1e-8)
      throw std::invalid_argument(
          "harmonic_reflect: trace disagrees with v on the axis at x=" +
          std::to_string(x));
  }

  HarmonicExtension out;
  out.upper_radius = upper_radius;
  out.lower_radius = r;
  out.eval = [v, trace](double x, double y) {
    if (y >= 0.0) return v(x, y);
    const Complex vc = trace(Complex(x, y));
    return 2.0 * vc.real() - v(x, -y);
  };
  return out;
}

/// Least-squares polynomial fit of Im f on axis samples.  Approximate by
/// construction: use only when the exact trace series is unavailable, and
/// expect fit error on top of method error.
inline PowerSeries1D fit_trace_least_squares(const AnalyticFunction& f,
                                             std::size_t degree, double radius,
                                             std::size_t samples = 64) {
  if (samples < std::max<std::size_t>(degree + 1, 2))
    throw std::invalid_argument("fit_trace_least_squares: too few samples");
  const std::size_t m = degree + 1;
  // Fit in the scaled variable u = x / span, with span covering the sample
  // range, and solve by QR: both are needed to keep degrees past ~10 from
  // drowning in conditioning error.
  const double span = 0.95 * radius;
  std::vector<double> vand(samples * m), rhs(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const double u = 2.0 * static_cast<double>(k) / (samples - 1) - 1.0;
    rhs[k] = f(Complex(span * u, 0.0)).imag();
    double pw = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      vand[k * m + j] = pw;
      pw *= u;
    }
  }
  std::vector<double> c =
      detail::solve_least_squares(std::move(vand), std::move(rhs), samples, m);
  double scale = 1.0;
  for (std::size_t j = 0; j < m; ++j) {
    c[j] *= scale;
    scale /= span;
  }
  return PowerSeries1D(std::move(c), radius);
}

/// Reflection across the real-analytic curve S = {x + i gamma(x)}.
/// The chart psi(zeta) = zeta + i gamma(zeta) flattens S to the axis; f is
/// conjugated into half-disc form, reflected with the given trace of Im f
/// on S, and mapped back through the reverted chart.
inline AnalyticFunction curve_flatten_reflect(const AnalyticFunction& f,
                                              const PowerSeries1D& gamma,
                                              const PowerSeries1D& trace,
                                              double chart_radius = 0.5) {
  if (f.arity() != 1)
    throw std::invalid_argument("curve_flatten_reflect: needs one variable");
  if (gamma.coeff(0) != 0.0)
    throw std::invalid_argument("curve_flatten_reflect: gamma(0) must be 0");
  if (!(chart_radius > 0.0) || chart_radius > 1.0)
    throw std::invalid_argument("curve_flatten_reflect: chart radius must be in (0,1]");

  // psi as a complex-coefficient series and its compositional inverse.
  std::vector<Complex> pc(std::max<std::size_t>(gamma.order(), 1) + 1, Complex(0.0));
  for (std::size_t n = 0; n < pc.size(); ++n)
    pc[n] = Complex(0.0, 1.0) * gamma.coeff(n);
  pc[1] += 1.0;
  Series1<Complex> psi(std::move(pc));
  Series1<Complex> inv = revert(psi, kSeriesOrder);

  double chart_limit = std::numeric_limits<double>::infinity();
  if (inv.nonzero_count() >= 16) chart_limit = estimate_radius(inv);
  if (chart_limit < 1e-6)
    throw std::runtime_error(
        "curve_flatten_reflect: chart is not invertible on a usable disc");

  // Shrink the flattened half disc until psi maps it into f's domain.
  double rho = std::min(chart_radius, 1.0);
  const int kShrinkLimit = 6;
  for (int attempt = 0;; ++attempt) {
    bool ok = true;
    for (int a = 0; a <= 12 && ok; ++a)
      for (int b = 0; b <= 6 && ok; ++b) {
        const double ang = 3.141592653589793 * a / 12.0;
        const double rr = rho * b / 6.0;
        const Complex zeta(rr * std::cos(ang), rr * std::sin(ang));
        if (!f.in_domain({psi(zeta)})) ok = false;
      }
    if (ok) break;
    if (attempt >= kShrinkLimit)
      throw std::runtime_error(
          "curve_flatten_reflect: curve chart never lands in the function domain");
    rho *= 0.5;
  }

  AnalyticFunction pulled(
      1, [f, psi](const ComplexVector& p) { return f(psi(p[0])); },
      DomainBox({Complex(0.0)}, {rho}, {CoordConstraint::ImPositive}));
  HalfDiscFunction flat(std::move(pulled), trace);
  AnalyticFunction reflected = general_reflect(flat);

  const double r_out = std::min({detail::reflection_radius(flat),
                                 0.9 * std::min(chart_limit, 1.0), rho});
  auto member = [reflected, inv, r_out](const ComplexVector& p) {
    if (std::abs(p[0]) > r_out + kDomainTol) return false;
    return reflected.in_domain({inv(p[0])});
  };
  auto eval = [reflected, inv](const ComplexVector& p) {
    return reflected(inv(p[0]));
  };
  return AnalyticFunction(1, std::move(eval), DomainBox::disc(r_out),
                          Provenance::ConstructedExtension, std::move(member));
}

}  // namespace reflexcr
