#pragma once

// Core value types shared by the whole toolkit: complex points, box-shaped
// domains, evaluable analytic functions, sample grids and the
// finite-difference Cauchy-Riemann residual used as the numerical
// holomorphy test everywhere else.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace reflexcr {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

/// Closed tolerance for every domain-membership test.  Points within this
/// distance of a boundary count as inside, so repeated evaluations near a
/// boundary cannot flap between inside and outside.
inline constexpr double kDomainTol = 1e-12;

/// Default step of the central-difference CR residual.
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kCrStep = 1e-5;

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(Complex z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

namespace detail {

inline std::string fmt_complex(Complex z) {
  std::ostringstream os;
  os.precision(17);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

inline std::string fmt_point(const ComplexVector& p) {
  std::ostringstream os;
  os << "(";
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (j) os << ", ";
    os << fmt_complex(p[j]);
  }
  os << ")";
  return os.str();
}

inline void ensure_finite(const ComplexVector& p, const char* what) {
  for (Complex z : p) {
    if (!is_finite(z)) {
      throw std::domain_error(std::string(what) +
                              ": non-finite value in point " + fmt_point(p));
    }
  }
}

/// Thread budget for grid evaluation.  REFLEXCR_THREADS caps it; a cap of 1
/// forces serial execution.
inline unsigned thread_budget() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* s = std::getenv("REFLEXCR_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end != s && v >= 1) hw = std::min<long>(hw, v);
  }
  return hw;
}

// Static-chunk parallel loop.  Each index writes only its own slot, so the
// result is identical for any thread count.  The lowest-index exception is
// the one rethrown.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  unsigned nthreads = thread_budget();
  if (n < 64 || nthreads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  nthreads = static_cast<unsigned>(
      std::min<std::size_t>(nthreads, (n + 63) / 64));
  std::vector<std::pair<std::size_t, std::exception_ptr>> errors(nthreads);
  for (auto& e : errors) e.first = n;
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (unsigned t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t]() {
      const std::size_t lo = n * t / nthreads;
      const std::size_t hi = n * (t + 1) / nthreads;
      for (std::size_t i = lo; i < hi; ++i) {
        try {
          body(i);
        } catch (...) {
          errors[t] = {i, std::current_exception()};
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  const std::pair<std::size_t, std::exception_ptr>* first = nullptr;
  for (const auto& e : errors) {
    if (e.second && (!first || e.first < first->first)) first = &e;
  }
  if (first) std::rethrow_exception(first->second);
}

}  // namespace detail

/// Optional one-sided constraint on a box coordinate, e.g. Im > 0 for the
/// upper half disc.  Constraints are evaluated with the closed tolerance.
enum class CoordConstraint { None, ImPositive, ImNegative, RePositive, ReNegative };

/// Product of per-coordinate discs |z_j - c_j| <= r_j, optionally cut by a
/// half-plane constraint per coordinate.
class DomainBox {
 public:
  DomainBox(ComplexVector center, std::vector<double> radii,
            std::vector<CoordConstraint> constraints = {})
      : center_(std::move(center)),
        radii_(std::move(radii)),
        constraints_(std::move(constraints)) {
    if (center_.size() != radii_.size())
      throw std::invalid_argument("DomainBox: center/radii size mismatch");
    if (center_.empty())
      throw std::invalid_argument("DomainBox: dimension must be positive");
    for (double r : radii_) {
      if (!(r > 0.0) || !is_finite(r))
        throw std::invalid_argument("DomainBox: radii must be positive");
    }
    if (!constraints_.empty() && constraints_.size() != center_.size())
      throw std::invalid_argument("DomainBox: constraints size mismatch");
    detail::ensure_finite(center_, "DomainBox");
  }

  std::size_t dim() const { return center_.size(); }
  const ComplexVector& center() const { return center_; }
  const std::vector<double>& radii() const { return radii_; }

  bool contains(const ComplexVector& p) const {
    if (p.size() != dim()) return false;
    for (std::size_t j = 0; j < dim(); ++j) {
      if (!is_finite(p[j])) return false;
      if (std::abs(p[j] - center_[j]) > radii_[j] + kDomainTol) return false;
      if (!constraints_.empty()) {
        switch (constraints_[j]) {
          case CoordConstraint::None: break;
          case CoordConstraint::ImPositive:
            if (p[j].imag() < -kDomainTol) return false;
            break;
          case CoordConstraint::ImNegative:
            if (p[j].imag() > kDomainTol) return false;
            break;
          case CoordConstraint::RePositive:
            if (p[j].real() < -kDomainTol) return false;
            break;
          case CoordConstraint::ReNegative:
            if (p[j].real() > kDomainTol) return false;
            break;
        }
      }
    }
    return true;
  }

  /// Open disc D(0, r) in one variable.
  static DomainBox disc(double r) { return DomainBox({Complex(0.0)}, {r}); }

  /// Upper half of D(0, r): the source domain of one-sided reflection.
  static DomainBox upper_half_disc(double r) {
    return DomainBox({Complex(0.0)}, {r}, {CoordConstraint::ImPositive});
  }

  static DomainBox polydisc(std::size_t n, double r) {
    return DomainBox(ComplexVector(n, Complex(0.0)), std::vector<double>(n, r));
  }

  static DomainBox polydisc(std::vector<double> radii) {
    ComplexVector c(radii.size(), Complex(0.0));
    return DomainBox(std::move(c), std::move(radii));
  }

 private:
  ComplexVector center_;
  std::vector<double> radii_;
  std::vector<CoordConstraint> constraints_;
};

enum class Provenance { BlackBox, Polynomial, SeriesBacked, ConstructedExtension };

/// An evaluable complex-valued map on a declared domain.  Evaluation outside
/// the domain, or any non-finite input or output, is a hard error.
///
/// Constructed domains that are not boxes (a wedge pair, a union of half
/// discs) install a membership predicate; the box then only serves as a
/// bounding region.
class AnalyticFunction {
 public:
  using Evaluator = std::function<Complex(const ComplexVector&)>;
  using Membership = std::function<bool(const ComplexVector&)>;

  AnalyticFunction(std::size_t arity, Evaluator evaluator, DomainBox domain,
                   Provenance tag = Provenance::BlackBox,
                   Membership membership = nullptr)
      : arity_(arity),
        evaluator_(std::move(evaluator)),
        domain_(std::move(domain)),
        tag_(tag),
        membership_(std::move(membership)) {
    if (arity_ == 0) throw std::invalid_argument("AnalyticFunction: arity 0");
    if (domain_.dim() != arity_)
      throw std::invalid_argument("AnalyticFunction: domain dimension != arity");
    if (!evaluator_) throw std::invalid_argument("AnalyticFunction: null evaluator");
  }

  std::size_t arity() const { return arity_; }
  const DomainBox& domain() const { return domain_; }
  Provenance provenance() const { return tag_; }

  bool in_domain(const ComplexVector& p) const {
    if (p.size() != arity_) return false;
    for (Complex z : p)
      if (!is_finite(z)) return false;
    return membership_ ? membership_(p) : domain_.contains(p);
  }

  Complex operator()(const ComplexVector& p) const {
    if (p.size() != arity_) {
      throw std::domain_error("AnalyticFunction: expected " +
                              std::to_string(arity_) + " coordinates, got " +
                              std::to_string(p.size()));
    }
    detail::ensure_finite(p, "AnalyticFunction");
    if (!in_domain(p)) {
      throw std::domain_error("AnalyticFunction: point outside domain: " +
                              detail::fmt_point(p));
    }
    Complex v = evaluator_(p);
    if (!is_finite(v)) {
      throw std::domain_error("AnalyticFunction: non-finite value at " +
                              detail::fmt_point(p));
    }
    return v;
  }

  Complex operator()(Complex z) const { return (*this)(ComplexVector{z}); }

 private:
  std::size_t arity_;
  Evaluator evaluator_;
  DomainBox domain_;
  Provenance tag_;
  Membership membership_;
};

/// Points with their function values.  Points must be pairwise distinct.
struct GridSample {
  std::vector<ComplexVector> points;
  std::vector<Complex> values;

  GridSample(std::vector<ComplexVector> pts, std::vector<Complex> vals)
      : points(std::move(pts)), values(std::move(vals)) {
    if (points.size() != values.size())
      throw std::invalid_argument("GridSample: points/values length mismatch");
    for (const auto& p : points) detail::ensure_finite(p, "GridSample");
    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto less = [&](std::size_t a, std::size_t b) {
      const auto& pa = points[a];
      const auto& pb = points[b];
      if (pa.size() != pb.size()) return pa.size() < pb.size();
      for (std::size_t j = 0; j < pa.size(); ++j) {
        if (pa[j].real() != pb[j].real()) return pa[j].real() < pb[j].real();
        if (pa[j].imag() != pb[j].imag()) return pa[j].imag() < pb[j].imag();
      }
      return false;
    };
    std::sort(order.begin(), order.end(), less);
    for (std::size_t i = 1; i < order.size(); ++i) {
      if (!less(order[i - 1], order[i]) && !less(order[i], order[i - 1]))
        throw std::invalid_argument("GridSample: duplicate point " +
                                    detail::fmt_point(points[order[i]]));
    }
  }

  std::size_t size() const { return points.size(); }
};

/// Verification record: a grid of extension values with optional oracle
/// values and the per-point CR residual of the candidate.
struct ResidualReport {
  GridSample grid;
  std::optional<std::vector<Complex>> oracle_values;
  std::vector<double> abs_errors;    // empty without an oracle
  std::vector<double> cr_residuals;
  double max_abs_error = 0.0;
  double max_cr_residual = 0.0;
};

/// Evaluates f at every point.  Pure and deterministic; points are
/// independent, so the loop may run on several threads.
inline GridSample evaluate_on_grid(const AnalyticFunction& f,
                                   const std::vector<ComplexVector>& points) {
  std::vector<Complex> values(points.size());
  detail::parallel_for(points.size(),
                       [&](std::size_t i) { values[i] = f(points[i]); });
  return GridSample(points, std::move(values));
}

/// Max over coordinates of the central-difference estimate of |df/dzbar_j|.
/// Zero to truncation order exactly when f is holomorphic at the point.
/// Requires a ball of radius 2*step around the point inside f's domain.
inline double cr_residual(const AnalyticFunction& f, const ComplexVector& point,
                          double step = kCrStep) {
  if (!(step > 0.0)) throw std::invalid_argument("cr_residual: step must be > 0");
  double worst = 0.0;
  ComplexVector p = point;
  for (std::size_t j = 0; j < point.size(); ++j) {
    const Complex z0 = point[j];
    p[j] = z0 + step;
    Complex fxp = f(p);
    p[j] = z0 - step;
    Complex fxm = f(p);
    p[j] = z0 + Complex(0.0, step);
    Complex fyp = f(p);
    p[j] = z0 - Complex(0.0, step);
    Complex fym = f(p);
    p[j] = z0;
    const Complex dx = (fxp - fxm) / (2.0 * step);
    const Complex dy = (fyp - fym) / (2.0 * step);
    worst = std::max(worst, std::abs(dx + Complex(0.0, 1.0) * dy) / 2.0);
  }
  return worst;
}

/// Pointwise comparison of f against an oracle, with the CR residual of f
/// recorded at every point.
inline ResidualReport compare(const AnalyticFunction& f,
                              const AnalyticFunction& oracle,
                              const std::vector<ComplexVector>& points,
                              double step = kCrStep) {
  GridSample grid = evaluate_on_grid(f, points);
  std::vector<Complex> ovals(points.size());
  std::vector<double> errs(points.size());
  std::vector<double> res(points.size());
  detail::parallel_for(points.size(), [&](std::size_t i) {
    ovals[i] = oracle(points[i]);
    errs[i] = std::abs(grid.values[i] - ovals[i]);
    res[i] = cr_residual(f, points[i], step);
  });
  ResidualReport report{std::move(grid), std::move(ovals), std::move(errs),
                        std::move(res), 0.0, 0.0};
  for (double e : report.abs_errors) report.max_abs_error = std::max(report.max_abs_error, e);
  for (double r : report.cr_residuals) report.max_cr_residual = std::max(report.max_cr_residual, r);
  return report;
}

}  // namespace reflexcr
