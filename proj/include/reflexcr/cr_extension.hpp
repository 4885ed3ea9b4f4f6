#pragma once

// The main extension pipeline: a function holomorphic on a wedge over a
// generic manifold, continuous up to the edge and with real-analytic
// imaginary trace, extends to a full two-sided neighborhood in flattened
// coordinates.  Stages: flatten and pull back, complexify the trace,
// reflect to the opposite wedge, average with the Moebius kernel, reattach
// the trace.  Each stage is a pure value usable on its own.

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>

#include "reflexcr/core.hpp"
#include "reflexcr/eow.hpp"
#include "reflexcr/series.hpp"
#include "reflexcr/wedge.hpp"

namespace reflexcr {

/// Evaluator split into the base block z and the parameter block w.
using TwoBlockEvaluator =
    std::function<Complex(const ComplexVector&, const ComplexVector&)>;

/// Ambient function living on a wedge and continuous up to its edge: the
/// domain is the wedge together with the manifold itself.
inline AnalyticFunction wedge_restriction(const Wedge& w,
                                          AnalyticFunction::Evaluator evaluator,
                                          Provenance tag = Provenance::BlackBox) {
  const GenericManifold& m = w.manifold;
  std::vector<double> radii;
  radii.reserve(m.n() + m.d());
  for (double r : m.base_radius()) radii.push_back(r);
  for (double r : m.param_radius()) radii.push_back(2.0 * r);
  Wedge copy = w;
  auto member = [copy](const ComplexVector& p) {
    if (!copy.manifold.in_ambient_box(p)) return false;
    std::vector<double> rho = copy.manifold.rho(p);
    double sup = 0.0;
    for (double v : rho) sup = std::max(sup, std::abs(v));
    if (sup <= 1e-9) return true;  // on the manifold: the edge
    return copy.cone.contains(rho);
  };
  return AnalyticFunction(m.n() + m.d(), std::move(evaluator),
                          DomainBox::polydisc(radii), tag, std::move(member));
}

/// Wedge-holomorphic function together with the series for its imaginary
/// part on the edge.  The trace is supplied, not extracted; construction
/// samples the edge and refuses a trace that disagrees with Im f there.
class WedgeFunction {
 public:
  WedgeFunction(Wedge wedge, AnalyticFunction f, MultiSeries trace,
                std::size_t samples = 64, unsigned seed = 7)
      : wedge_(std::move(wedge)), f_(std::move(f)), trace_(std::move(trace)) {
    const GenericManifold& m = wedge_.manifold;
    if (f_.arity() != m.n() + m.d())
      throw std::invalid_argument("WedgeFunction: f must take n + d coordinates");
    if (trace_.nvars() != 2 * m.n() + m.d())
      throw std::invalid_argument("WedgeFunction: trace must use 2n + d variables");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    double worst = 0.0;
    ComplexVector worst_at;
    for (std::size_t k = 0; k < samples; ++k) {
      ComplexVector z(m.n());
      for (std::size_t j = 0; j < m.n(); ++j)
        z[j] = Complex(m.base_radius()[j] * u(rng), m.base_radius()[j] * u(rng));
      std::vector<double> s(m.d());
      for (std::size_t j = 0; j < m.d(); ++j) s[j] = m.param_radius()[j] * u(rng);
      ComplexVector p = psi(m, z, s);
      std::vector<double> args(2 * m.n() + m.d());
      for (std::size_t j = 0; j < m.n(); ++j) {
        args[j] = z[j].real();
        args[m.n() + j] = z[j].imag();
      }
      for (std::size_t j = 0; j < m.d(); ++j) args[2 * m.n() + j] = s[j];
      const double gap = std::abs(f_(p).imag() - trace_.eval(args).real());
      if (gap > worst) {
        worst = gap;
        worst_at = p;
      }
    }
    if (worst > 1e-8) {
      std::ostringstream os;
      os << "WedgeFunction: trace disagrees with Im f on the edge by " << worst
         << " at " << detail::fmt_point(worst_at);
      throw std::invalid_argument(os.str());
    }
  }

  const Wedge& wedge() const { return wedge_; }
  const AnalyticFunction& f() const { return f_; }
  const MultiSeries& trace() const { return trace_; }

 private:
  Wedge wedge_;
  AnalyticFunction f_;
  MultiSeries trace_;
};

/// Pull-back of the wedge function through the flattening chart:
/// (z, w) -> f(psi_tilde(z, w)), defined for Im w in the verified subcone
/// or zero.  Construction goes through pull_back below.
class ChartFunction {
 public:
  ChartFunction(std::size_t n, std::size_t d, Cone cone, ChartBoxes boxes,
                WedgeSampleReport certificate, TwoBlockEvaluator evaluator)
      : n_(n),
        d_(d),
        cone_(std::move(cone)),
        boxes_(boxes),
        certificate_(certificate),
        eval_(std::move(evaluator)) {
    if (cone_.dimension() != d_)
      throw std::invalid_argument("ChartFunction: cone dimension must equal d");
    if (!eval_) throw std::invalid_argument("ChartFunction: null evaluator");
  }

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  const Cone& cone() const { return cone_; }
  const ChartBoxes& boxes() const { return boxes_; }
  const WedgeSampleReport& certificate() const { return certificate_; }

  /// Box-and-cone membership; `two_sided` also admits Im w in the opposite
  /// cone (used by the reflected data, not by the pull-back itself).
  bool contains(const ComplexVector& z, const ComplexVector& w,
                bool two_sided = false) const {
    if (z.size() != n_ || w.size() != d_) return false;
    for (Complex c : z)
      if (!is_finite(c) || std::abs(c) > boxes_.base_radius + kDomainTol)
        return false;
    std::vector<double> t(d_);
    double tmax = 0.0, tnorm = 0.0;
    for (std::size_t j = 0; j < d_; ++j) {
      if (!is_finite(w[j])) return false;
      if (std::abs(w[j].real()) > boxes_.base_radius + kDomainTol) return false;
      t[j] = w[j].imag();
      tmax = std::max(tmax, std::abs(t[j]));
      tnorm += t[j] * t[j];
    }
    if (std::sqrt(tnorm) > boxes_.t_radius + kDomainTol) return false;
    if (tmax <= 1e-12) return true;  // edge
    if (cone_.contains(t)) return true;
    if (two_sided) {
      for (double& v : t) v = -v;
      return cone_.contains(t);
    }
    return false;
  }

  Complex operator()(const ComplexVector& z, const ComplexVector& w) const {
    if (!contains(z, w))
      throw std::domain_error("ChartFunction: point outside the flattened wedge: " +
                              detail::fmt_point(z) + " x " + detail::fmt_point(w));
    Complex v = eval_(z, w);
    if (!is_finite(v))
      throw std::domain_error("ChartFunction: non-finite value at " +
                              detail::fmt_point(w));
    return v;
  }

 private:
  std::size_t n_, d_;
  Cone cone_;
  ChartBoxes boxes_;
  WedgeSampleReport certificate_;
  TwoBlockEvaluator eval_;
};

/// Flattens the wedge and composes: the result evaluates f(psi_tilde(z, w)).
/// The chart boxes are certified first by sampled wedge invariance (halving
/// until the sweep stays inside the wedge); an instance that cannot be
/// certified is refused with the failing report in the message.
inline ChartFunction pull_back(const WedgeFunction& wf, const Cone& gamma_prime,
                               ChartBoxes start = ChartBoxes{},
                               std::size_t samples = 200, unsigned seed = 3) {
  const Wedge& w = wf.wedge();
  if (gamma_prime.dimension() != w.manifold.d())
    throw std::invalid_argument("pull_back: subcone dimension must equal d");
  WedgeSampleReport last{};
  std::optional<ChartBoxes> boxes =
      lemma27_certify(w, gamma_prime, start, samples, seed, &last);
  if (!boxes) {
    std::ostringstream os;
    os << "pull_back: wedge invariance could not be verified down to the "
          "minimum box; last report: "
       << last.violations << " of " << last.samples
       << " samples left the wedge, worst cone margin " << last.worst_margin;
    throw std::runtime_error(os.str());
  }
  GenericManifold m = w.manifold;
  AnalyticFunction f = wf.f();
  auto eval = [m, f](const ComplexVector& z, const ComplexVector& wv) {
    return f(psi_tilde(m, z, wv));
  };
  return ChartFunction(m.n(), m.d(), gamma_prime, *boxes, last, std::move(eval));
}

/// The edge trace with its parameter slots complexified: v(z, zbar, w),
/// holomorphic in w, real for real w.
class TraceFunction {
 public:
  TraceFunction(std::size_t n, std::size_t d, MultiSeries series,
                AnalyticFunction complexified)
      : n_(n), d_(d), series_(std::move(series)), cx_(std::move(complexified)) {}

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  const MultiSeries& series() const { return series_; }

  Complex operator()(const ComplexVector& z, const ComplexVector& w) const {
    if (z.size() != n_ || w.size() != d_)
      throw std::invalid_argument("TraceFunction: argument dimensions mismatch");
    ComplexVector args(2 * n_ + d_);
    for (std::size_t j = 0; j < n_; ++j) {
      args[j] = Complex(z[j].real(), 0.0);
      args[n_ + j] = Complex(z[j].imag(), 0.0);
    }
    for (std::size_t j = 0; j < d_; ++j) args[2 * n_ + j] = w[j];
    return cx_(args);
  }

 private:
  std::size_t n_, d_;
  MultiSeries series_;
  AnalyticFunction cx_;
};

/// Complexifies the trace series of a wedge function in its parameter
/// slots; the base slots stay real.  The declared polyradii default to the
/// manifold box and must cover every later evaluation.
inline TraceFunction complexify_trace(const WedgeFunction& wf,
                                      std::vector<double> w_radii = {}) {
  const GenericManifold& m = wf.wedge().manifold;
  if (w_radii.empty()) w_radii = m.param_radius();
  if (w_radii.size() != m.d())
    throw std::invalid_argument("complexify_trace: one radius per parameter");
  std::vector<double> radii(2 * m.n() + m.d());
  std::vector<bool> slots(2 * m.n() + m.d(), false);
  for (std::size_t j = 0; j < m.n(); ++j) {
    radii[j] = m.base_radius()[j];
    radii[m.n() + j] = m.base_radius()[j];
  }
  for (std::size_t j = 0; j < m.d(); ++j) {
    radii[2 * m.n() + j] = w_radii[j];
    slots[2 * m.n() + j] = true;
  }
  AnalyticFunction cx = complexify(wf.trace(), std::move(radii), std::move(slots));
  return TraceFunction(m.n(), m.d(), wf.trace(), std::move(cx));
}

/// The reflected two-sided data: on the wedge side the pull-back minus i
/// times the complexified trace; on the opposite side the conjugate
/// reflection of that expression.  Real on the edge.
class GFunction {
 public:
  GFunction(std::size_t n, std::size_t d, ChartBoxes boxes, Cone cone,
            TwoBlockEvaluator upper, TwoBlockEvaluator lower)
      : n_(n),
        d_(d),
        boxes_(boxes),
        cone_(std::move(cone)),
        upper_(std::move(upper)),
        lower_(std::move(lower)) {
    if (cone_.dimension() != d_)
      throw std::invalid_argument("GFunction: cone dimension must equal d");
    if (!upper_ || !lower_)
      throw std::invalid_argument("GFunction: null evaluator");
  }

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  const ChartBoxes& boxes() const { return boxes_; }
  const Cone& cone() const { return cone_; }

  bool contains(const ComplexVector& z, const ComplexVector& w) const {
    return region(z, w) != Region::Outside;
  }

  Complex operator()(const ComplexVector& z, const ComplexVector& w) const {
    switch (region(z, w)) {
      case Region::Edge:
      case Region::Upper:
        return finite(upper_(z, w), w);
      case Region::Lower:
        return finite(lower_(z, w), w);
      case Region::Outside:
      default:
        throw std::domain_error("GFunction: point outside both wedges: " +
                                detail::fmt_point(z) + " x " +
                                detail::fmt_point(w));
    }
  }

 private:
  enum class Region { Edge, Upper, Lower, Outside };

  Region region(const ComplexVector& z, const ComplexVector& w) const {
    if (z.size() != n_ || w.size() != d_) return Region::Outside;
    for (Complex c : z)
      if (!is_finite(c) || std::abs(c) > boxes_.base_radius + kDomainTol)
        return Region::Outside;
    std::vector<double> t(d_);
    double tmax = 0.0, tnorm = 0.0;
    for (std::size_t j = 0; j < d_; ++j) {
      if (!is_finite(w[j])) return Region::Outside;
      if (std::abs(w[j].real()) > boxes_.base_radius + kDomainTol)
        return Region::Outside;
      t[j] = w[j].imag();
      tmax = std::max(tmax, std::abs(t[j]));
      tnorm += t[j] * t[j];
    }
    if (std::sqrt(tnorm) > boxes_.t_radius + kDomainTol) return Region::Outside;
    if (tmax <= 1e-12) return Region::Edge;
    if (cone_.contains(t)) return Region::Upper;
    for (double& v : t) v = -v;
    if (cone_.contains(t)) return Region::Lower;
    return Region::Outside;
  }

  static Complex finite(Complex v, const ComplexVector& w) {
    if (!is_finite(v))
      throw std::domain_error("GFunction: non-finite value at " +
                              detail::fmt_point(w));
    return v;
  }

  std::size_t n_, d_;
  ChartBoxes boxes_;
  Cone cone_;
  TwoBlockEvaluator upper_, lower_;
};

/// Builds the reflected data from a pull-back and a complexified trace.
/// The lower branch conjugates the whole upper expression at the conjugate
/// point; with a real-coefficient trace the two groupings of the bar
/// coincide.  Edge samples must come out real, otherwise the trace is
/// inconsistent with the wedge data.
inline GFunction build_g(const ChartFunction& pb, const TraceFunction& v,
                         std::size_t samples = 64, unsigned seed = 5) {
  if (pb.n() != v.n() || pb.d() != v.d())
    throw std::invalid_argument("build_g: operand dimensions mismatch");
  const Complex i(0.0, 1.0);
  auto upper = [pb, v, i](const ComplexVector& z, const ComplexVector& w) {
    return pb(z, w) - i * v(z, w);
  };
  auto lower = [pb, v, i](const ComplexVector& z, const ComplexVector& w) {
    ComplexVector wb(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) wb[j] = std::conj(w[j]);
    return std::conj(pb(z, wb) - i * v(z, wb));
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const ChartBoxes& b = pb.boxes();
  double worst = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    ComplexVector z(pb.n());
    for (auto& c : z) c = Complex(b.base_radius * u(rng), b.base_radius * u(rng));
    ComplexVector w(pb.d());
    for (auto& c : w) c = Complex(b.base_radius * u(rng), 0.0);
    worst = std::max(worst, std::abs(upper(z, w).imag()));
  }
  if (worst > 1e-8) {
    std::ostringstream os;
    os << "build_g: trace is inconsistent with the wedge data; the reflected "
          "function has imaginary part "
       << worst << " on the edge";
    throw std::invalid_argument(os.str());
  }
  return GFunction(pb.n(), pb.d(), b, pb.cone(), std::move(upper), std::move(lower));
}

/// Averaged extension of the reflected data: holomorphic in w on a fixed
/// polydisc image, continuous in z.
class CrExtended {
 public:
  CrExtended(std::size_t n, std::size_t d, double z_radius, double scale,
             std::vector<double> forward, std::vector<double> inverse,
             std::size_t nodes, TwoBlockEvaluator evaluator)
      : n_(n),
        d_(d),
        z_radius_(z_radius),
        scale_(scale),
        forward_(std::move(forward)),
        inverse_(std::move(inverse)),
        nodes_(nodes),
        eval_(std::move(evaluator)) {}

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  double z_radius() const { return z_radius_; }
  double scale() const { return scale_; }
  const std::vector<double>& forward() const { return forward_; }
  const std::vector<double>& inverse() const { return inverse_; }
  std::size_t nodes() const { return nodes_; }

  bool contains(const ComplexVector& z, const ComplexVector& w) const {
    if (z.size() != n_ || w.size() != d_) return false;
    for (Complex c : z)
      if (!is_finite(c) || std::abs(c) > z_radius_ + kDomainTol) return false;
    for (Complex c : w)
      if (!is_finite(c)) return false;
    ComplexVector wt = detail::apply_matrix(inverse_, d_, w);
    for (Complex c : wt)
      if (std::abs(c) > 1.0 + kDomainTol) return false;
    return true;
  }

  Complex operator()(const ComplexVector& z, const ComplexVector& w) const {
    if (!contains(z, w))
      throw std::domain_error("CrExtended: point outside the extension domain: " +
                              detail::fmt_point(z) + " x " + detail::fmt_point(w));
    Complex v = eval_(z, w);
    if (!is_finite(v))
      throw std::domain_error("CrExtended: non-finite value at " +
                              detail::fmt_point(w));
    return v;
  }

 private:
  std::size_t n_, d_;
  double z_radius_, scale_;
  std::vector<double> forward_, inverse_;
  std::size_t nodes_;
  TwoBlockEvaluator eval_;
};

/// Kernel averaging in the parameter block, z carried along.  The model
/// polydisc is scaled so the kernel sweep (bounded by 6 in each model
/// coordinate) stays inside g's boxes; if a probe still escapes, the scale
/// is halved, up to six times.
inline CrExtended extend(const GFunction& g, const NormalizationMap& norm,
                         std::size_t nodes = 256, unsigned seed = 11) {
  const std::size_t d = g.d();
  if (norm.dim() != d)
    throw std::invalid_argument("extend: normalization dimension mismatch");
  if (nodes < 4) throw std::invalid_argument("extend: too few quadrature nodes");

  {
    std::vector<std::vector<double>> es;
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<double> e(d, 0.0);
      e[j] = 1.0;
      es.push_back(std::move(e));
    }
    ConeContainmentReport rep = cone_containment_check(
        Cone(d, std::move(es), "model"), norm.matrix(), g.cone(), 400, 2);
    if (!rep.interior_pass)
      throw std::invalid_argument(
          "extend: normalization does not carry the model cone into the wedge "
          "cone");
  }

  const std::vector<double>& a = norm.matrix();
  double sigma = std::numeric_limits<double>::infinity();
  double frob = 0.0;
  for (std::size_t r = 0; r < d; ++r) {
    double rowsum = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      rowsum += std::abs(a[r * d + c]);
      frob += a[r * d + c] * a[r * d + c];
    }
    sigma = std::min(sigma, g.boxes().base_radius / (6.0 * rowsum));
  }
  frob = std::sqrt(frob);
  sigma = std::min(sigma, g.boxes().t_radius /
                              (6.0 * std::sqrt(static_cast<double>(d)) * frob));

  // Probe set on the closed model polydisc: center, real corners, random
  // complex points.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> rad(0.0, 1.0);
  std::vector<ComplexVector> probes;
  probes.emplace_back(d, Complex(0.0));
  const std::size_t corners = d <= 4 ? (std::size_t{1} << d) : 16;
  for (std::size_t mask = 0; mask < corners; ++mask) {
    ComplexVector c(d);
    for (std::size_t j = 0; j < d; ++j)
      c[j] = (d <= 4 ? ((mask >> j) & 1) : (rng() & 1)) ? 1.0 : -1.0;
    probes.push_back(std::move(c));
  }
  for (int k = 0; k < 8; ++k) {
    ComplexVector c(d);
    for (std::size_t j = 0; j < d; ++j) c[j] = std::polar(rad(rng), ang(rng));
    probes.push_back(std::move(c));
  }

  const ComplexVector z0(g.n(), Complex(0.0));
  std::vector<double> fwd(d * d), inv(d * d);
  std::string escape;
  bool fitted = false;
  for (int attempt = 0; attempt < 7; ++attempt) {
    for (std::size_t i = 0; i < d * d; ++i) {
      fwd[i] = sigma * a[i];
      inv[i] = norm.inverse()[i] / sigma;
    }
    try {
      for (const ComplexVector& wt : probes) {
        for (std::size_t k = 0; k < nodes; ++k) {
          const double theta =
              2.0 * kPi * static_cast<double>(k) / static_cast<double>(nodes);
          ComplexVector q = detail::apply_matrix(
              fwd, d, build_Phi(wt, Complex(std::cos(theta), std::sin(theta))));
          g(z0, q);
        }
      }
      fitted = true;
      break;
    } catch (const std::domain_error& e) {
      escape = e.what();
      sigma *= 0.5;
    }
  }
  if (!fitted)
    throw std::runtime_error(
        "extend: quadrature kept escaping the wedge domain after six scale "
        "halvings; last escape: " +
        escape);

  GFunction gcopy = g;
  auto eval = [gcopy, fwd, inv, d, nodes](const ComplexVector& z,
                                          const ComplexVector& w) {
    ComplexVector wt = detail::apply_matrix(inv, d, w);
    Complex acc(0.0);
    for (std::size_t k = 0; k < nodes; ++k) {
      const double theta =
          2.0 * kPi * static_cast<double>(k) / static_cast<double>(nodes);
      const Complex lambda(std::cos(theta), std::sin(theta));
      ComplexVector q = detail::apply_matrix(fwd, d, build_Phi(wt, lambda));
      try {
        acc += gcopy(z, q);
      } catch (const std::domain_error& e) {
        throw std::domain_error(
            "extend: quadrature left the wedge domain at node " +
            std::to_string(k) + " (theta=" + std::to_string(theta) +
            "), point " + detail::fmt_point(q) + ": " + e.what());
      }
    }
    return acc / static_cast<double>(nodes);
  };
  return CrExtended(g.n(), d, g.boxes().base_radius, sigma, std::move(fwd),
                    std::move(inv), nodes, std::move(eval));
}

/// The assembled extension F = G + i v in flattened coordinates, with the
/// chart needed to push it to the ambient neighborhood.
struct ExtensionResult {
  std::size_t n = 0, d = 0;
  GenericManifold manifold;
  TwoBlockEvaluator F_chart;
  ChartBoxes boxes;
  double z_radius = 0.0;
  double scale = 0.0;
  std::vector<double> forward, inverse;
  std::size_t nodes = 0;
  std::optional<ResidualReport> report;

  Complex chart(const ComplexVector& z, const ComplexVector& w) const {
    return F_chart(z, w);
  }

  /// Value at an ambient point, through the inverse flattening chart.
  Complex ambient(const ComplexVector& point) const {
    auto [z, w] = psi_tilde_inverse(manifold, point);
    return F_chart(z, w);
  }
};

/// Reattaches the trace: F = G + i v.  Sampled consistency: F must match
/// the pull-back on the wedge side and reproduce the trace on the edge.
inline ExtensionResult reassemble(const CrExtended& G, const TraceFunction& v,
                                  const ChartFunction& pb,
                                  const GenericManifold& manifold,
                                  std::size_t samples = 48, unsigned seed = 9) {
  if (G.n() != v.n() || G.d() != v.d() || pb.n() != v.n() || pb.d() != v.d())
    throw std::invalid_argument("reassemble: operand dimensions mismatch");
  const Complex i(0.0, 1.0);
  CrExtended Gc = G;
  TraceFunction vc = v;
  TwoBlockEvaluator F = [Gc, vc, i](const ComplexVector& z, const ComplexVector& w) {
    return Gc(z, w) + i * vc(z, w);
  };

  const std::size_t d = G.d();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::uniform_real_distribution<double> up(0.05, 0.5);
  double worst_edge = 0.0, worst_wedge = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    ComplexVector z(G.n());
    for (auto& c : z) c = Complex(G.z_radius() * u(rng), G.z_radius() * u(rng));

    ComplexVector wt(d);
    for (auto& c : wt) c = Complex(u(rng), 0.0);
    ComplexVector ws = detail::apply_matrix(G.forward(), d, wt);
    const Complex fe = F(z, ws);
    const Complex ve = vc(z, ws);
    worst_edge = std::max(worst_edge, std::abs(fe.imag() - ve.real()));

    for (std::size_t j = 0; j < d; ++j) wt[j] = Complex(u(rng), up(rng));
    ComplexVector ww = detail::apply_matrix(G.forward(), d, wt);
    worst_wedge = std::max(worst_wedge, std::abs(F(z, ww) - pb(z, ww)));
  }
  if (worst_edge > 1e-8)
    throw std::runtime_error(
        "reassemble: the extension does not reproduce the edge trace; gap " +
        std::to_string(worst_edge));
  if (worst_wedge > 1e-9)
    throw std::runtime_error(
        "reassemble: the extension disagrees with the wedge data by " +
        std::to_string(worst_wedge));

  ExtensionResult result{pb.n(),      pb.d(),        manifold,
                         std::move(F), pb.boxes(),    G.z_radius(),
                         G.scale(),   G.forward(),   G.inverse(),
                         G.nodes(),   std::nullopt};
  return result;
}

/// Oracle comparison on a mixed edge/upper/lower sample set, with the
/// Cauchy-Riemann residual of F taken in the w block only.
inline ResidualReport extension_report(const ExtensionResult& r,
                                       const AnalyticFunction::Evaluator& oracle,
                                       std::size_t samples = 40,
                                       unsigned seed = 13) {
  if (!oracle) throw std::invalid_argument("extension_report: null oracle");
  const std::size_t n = r.n, d = r.d;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::uniform_real_distribution<double> up(0.1, 0.5);

  std::vector<ComplexVector> zs(samples), ws(samples), pts(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    ComplexVector z(n);
    for (auto& c : z) c = Complex(r.z_radius * u(rng), r.z_radius * u(rng));
    ComplexVector wt(d);
    const int kind = static_cast<int>(k % 3);
    for (auto& c : wt) {
      const double im = kind == 0 ? 0.0 : (kind == 1 ? up(rng) : -up(rng));
      c = Complex(u(rng), im);
    }
    ComplexVector w = detail::apply_matrix(r.forward, d, wt);
    ComplexVector p = z;
    p.insert(p.end(), w.begin(), w.end());
    zs[k] = std::move(z);
    ws[k] = std::move(w);
    pts[k] = std::move(p);
  }

  std::vector<Complex> values(samples), ovals(samples);
  std::vector<double> errs(samples), res(samples);
  const double h = kCrStep;
  detail::parallel_for(samples, [&](std::size_t k) {
    values[k] = r.F_chart(zs[k], ws[k]);
    ovals[k] = oracle(psi_tilde(r.manifold, zs[k], ws[k]));
    errs[k] = std::abs(values[k] - ovals[k]);
    double worst = 0.0;
    ComplexVector w = ws[k];
    for (std::size_t j = 0; j < d; ++j) {
      const Complex w0 = w[j];
      w[j] = w0 + h;
      Complex fxp = r.F_chart(zs[k], w);
      w[j] = w0 - h;
      Complex fxm = r.F_chart(zs[k], w);
      w[j] = w0 + Complex(0.0, h);
      Complex fyp = r.F_chart(zs[k], w);
      w[j] = w0 - Complex(0.0, h);
      Complex fym = r.F_chart(zs[k], w);
      w[j] = w0;
      const Complex dx = (fxp - fxm) / (2.0 * h);
      const Complex dy = (fyp - fym) / (2.0 * h);
      worst = std::max(worst, std::abs(dx + Complex(0.0, 1.0) * dy) / 2.0);
    }
    res[k] = worst;
  });

  ResidualReport report{GridSample(std::move(pts), std::move(values)),
                        std::move(ovals),
                        std::move(errs),
                        std::move(res),
                        0.0,
                        0.0};
  for (double e : report.abs_errors)
    report.max_abs_error = std::max(report.max_abs_error, e);
  for (double c : report.cr_residuals)
    report.max_cr_residual = std::max(report.max_cr_residual, c);
  return report;
}

/// Everything the pipeline computed along the way, for stage-by-stage dumps.
struct PipelineParts {
  std::optional<ChartFunction> pulled_back;
  std::optional<TraceFunction> trace;
  std::optional<GFunction> reflected;
  std::optional<CrExtended> averaged;
};

struct CrPipelineOptions {
  std::optional<Cone> gamma_prime;               // default: wedge cone shrunk 0.5
  std::optional<NormalizationMap> normalization; // default: from the subcone
  ChartBoxes boxes{};
  std::size_t nodes = 256;
  std::size_t lemma_samples = 200;
  std::size_t check_samples = 48;
  std::size_t report_samples = 40;
  unsigned seed = 3;
  AnalyticFunction::Evaluator oracle;            // ambient reference, optional
};

namespace detail {

template <typename Fn>
auto pipeline_stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("crextend[") + name + "]: " + e.what());
  }
}

}  // namespace detail

/// The whole pipeline.  Any stage error is rethrown with the stage name in
/// the message; intermediate stages are exposed through `parts`.
inline ExtensionResult extend_cr_function(const WedgeFunction& wf,
                                          CrPipelineOptions opt = {},
                                          PipelineParts* parts = nullptr) {
  Cone gamma_prime = opt.gamma_prime
                         ? *opt.gamma_prime
                         : detail::pipeline_stage("subcone", [&] {
                             return wf.wedge().cone.shrunk(0.5);
                           });
  ChartFunction pb = detail::pipeline_stage("pullback", [&] {
    return pull_back(wf, gamma_prime, opt.boxes, opt.lemma_samples, opt.seed);
  });
  if (parts) parts->pulled_back = pb;
  TraceFunction v =
      detail::pipeline_stage("trace", [&] { return complexify_trace(wf); });
  if (parts) parts->trace = v;
  GFunction g = detail::pipeline_stage("reflect", [&] { return build_g(pb, v); });
  if (parts) parts->reflected = g;
  NormalizationMap norm =
      opt.normalization ? *opt.normalization
                        : detail::pipeline_stage("normalize", [&] {
                            return NormalizationMap::from_cone(gamma_prime);
                          });
  CrExtended G = detail::pipeline_stage(
      "extend", [&] { return extend(g, norm, opt.nodes, opt.seed + 8); });
  if (parts) parts->averaged = G;
  ExtensionResult result = detail::pipeline_stage("reassemble", [&] {
    return reassemble(G, v, pb, wf.wedge().manifold, opt.check_samples,
                      opt.seed + 6);
  });
  if (opt.oracle) {
    result.report = detail::pipeline_stage("report", [&] {
      return extension_report(result, opt.oracle, opt.report_samples,
                              opt.seed + 10);
    });
  }
  return result;
}

enum class UniquenessStatus { Pass, Fail, NotApplicable };

/// Outcome of the two-function agreement check on the manifold.
struct UniquenessReport {
  UniquenessStatus status = UniquenessStatus::NotApplicable;
  double max_im_gap = 0.0;  // gate: |Im f - Im g| over the grid
  double base_gap = 0.0;    // gate: |f - g| at the base point
  double max_diff = 0.0;    // conclusion: max |f - g| over the grid
  std::string detail;
};

/// Operational check of the uniqueness statement on supplied data: two CR
/// functions with the same imaginary part on M and the same value at one
/// point should agree everywhere on the grid.  Gate violations make the
/// check inapplicable rather than failed.
inline UniquenessReport uniqueness_check(
    const AnalyticFunction& f, const AnalyticFunction& g,
    const GenericManifold& m,
    const std::vector<std::pair<ComplexVector, std::vector<double>>>& grid,
    std::size_t base_index = 0) {
  if (grid.empty()) throw std::invalid_argument("uniqueness_check: empty grid");
  if (base_index >= grid.size())
    throw std::invalid_argument("uniqueness_check: base index out of range");
  UniquenessReport rep;
  std::vector<Complex> fv(grid.size()), gv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ComplexVector p = psi(m, grid[i].first, grid[i].second);
    fv[i] = f(p);
    gv[i] = g(p);
    rep.max_im_gap =
        std::max(rep.max_im_gap, std::abs(fv[i].imag() - gv[i].imag()));
  }
  rep.base_gap = std::abs(fv[base_index] - gv[base_index]);
  if (rep.max_im_gap > 1e-10) {
    rep.detail = "imaginary parts differ on the grid; hypotheses not met";
    return rep;
  }
  if (rep.base_gap > 1e-10) {
    rep.detail = "values differ at the base point; hypotheses not met";
    return rep;
  }
  for (std::size_t i = 0; i < grid.size(); ++i)
    rep.max_diff = std::max(rep.max_diff, std::abs(fv[i] - gv[i]));
  if (rep.max_diff < 1e-8) {
    rep.status = UniquenessStatus::Pass;
    rep.detail = "functions agree on the manifold";
  } else {
    rep.status = UniquenessStatus::Fail;
    rep.detail = "gates hold but the values split on the grid";
  }
  return rep;
}

/// Target manifold whose graph depends on the base variables only.
class RigidManifold {
 public:
  RigidManifold(std::size_t n, std::size_t d, std::vector<MultiSeries> graph_phi)
      : n_(n), d_(d), phi_(std::move(graph_phi)) {
    if (n_ == 0 || d_ == 0)
      throw std::invalid_argument("RigidManifold: n and d must be positive");
    if (phi_.size() != d_)
      throw std::invalid_argument("RigidManifold: one series per normal coordinate");
    for (const auto& p : phi_) {
      if (p.nvars() != 2 * n_)
        throw std::invalid_argument(
            "RigidManifold: series must use the 2n base variables only");
      std::vector<int> alpha(2 * n_, 0);
      if (std::abs(p.coeff(alpha)) > 1e-14)
        throw std::invalid_argument("RigidManifold: phi(0) must vanish");
      for (std::size_t v = 0; v < 2 * n_; ++v) {
        alpha[v] = 1;
        if (std::abs(p.coeff(alpha)) > 1e-14)
          throw std::invalid_argument(
              "RigidManifold: first-order terms of phi must vanish");
        alpha[v] = 0;
      }
    }
  }

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  const std::vector<MultiSeries>& phi() const { return phi_; }

 private:
  std::size_t n_, d_;
  std::vector<MultiSeries> phi_;
};

/// Traces of the normal components of a map into a rigid target: when the
/// tangential components f_1..f_n' extend, the normal ones have imaginary
/// trace phi'_i(Re f, Im f), computed here by series composition.  Each
/// returned series is a valid trace input for the pipeline.
inline std::vector<MultiSeries> rigid_target_traces(
    const std::vector<std::pair<MultiSeries, MultiSeries>>& components,
    const RigidManifold& target) {
  if (components.size() != target.n())
    throw std::invalid_argument(
        "rigid_target_traces: need one (Re, Im) pair per target base "
        "coordinate");
  std::vector<MultiSeries> inner;
  inner.reserve(2 * target.n());
  for (const auto& c : components) inner.push_back(c.first);
  for (const auto& c : components) inner.push_back(c.second);
  std::vector<MultiSeries> out;
  out.reserve(target.d());
  for (const auto& p : target.phi()) out.push_back(p.compose(inner));
  return out;
}

}  // namespace reflexcr
