#pragma once

// Truncated power series in one and several variables.  These are the
// workhorses behind traces, charts and reflected extensions: formal
// coefficient arithmetic plus evaluation at complex points.
//
// Coefficients are templated so the same code serves real-coefficient
// public types and the complex-coefficient internals needed for chart
// reversion.

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <vector>

#include "reflexcr/core.hpp"

namespace reflexcr {

/// Default truncation order of univariate series.
inline constexpr std::size_t kSeriesOrder = 64;

/// Default total-degree truncation of multivariate series.
inline constexpr std::size_t kMultiDegree = 16;

/// Univariate truncated power series sum a_n z^n with a declared radius of
/// convergence.  The radius is metadata: evaluation enforces it, formal
/// arithmetic propagates it conservatively (min of the operands).
template <typename Coeff>
class Series1 {
 public:
  explicit Series1(std::vector<Coeff> coeffs,
                   double radius = std::numeric_limits<double>::infinity())
      : coeffs_(std::move(coeffs)), radius_(radius) {
    if (coeffs_.empty()) coeffs_.push_back(Coeff(0));
    if (!(radius_ > 0.0))
      throw std::invalid_argument("Series1: radius must be positive");
  }

  static Series1 zero() { return Series1({Coeff(0)}); }

  /// The monomial z.
  static Series1 identity() { return Series1({Coeff(0), Coeff(1)}); }

  const std::vector<Coeff>& coeffs() const { return coeffs_; }
  std::size_t order() const { return coeffs_.size() - 1; }
  double radius() const { return radius_; }
  void set_radius(double r) {
    if (!(r > 0.0)) throw std::invalid_argument("Series1: radius must be positive");
    radius_ = r;
  }

  Coeff coeff(std::size_t n) const {
    return n < coeffs_.size() ? coeffs_[n] : Coeff(0);
  }

  std::size_t nonzero_count() const {
    std::size_t k = 0;
    for (const Coeff& c : coeffs_)
      if (c != Coeff(0)) ++k;
    return k;
  }

  Series1 truncated(std::size_t nmax) const {
    std::vector<Coeff> c(coeffs_.begin(),
                         coeffs_.begin() + std::min(coeffs_.size(), nmax + 1));
    return Series1(std::move(c), radius_);
  }

  /// Horner evaluation.  Points outside the declared radius are rejected.
  Complex operator()(Complex z) const {
    if (std::isfinite(radius_) && std::abs(z) > radius_ + kDomainTol)
      throw std::domain_error("Series1: |z| exceeds declared radius");
    Complex acc(0.0);
    for (std::size_t n = coeffs_.size(); n-- > 0;)
      acc = acc * z + Complex(coeffs_[n]);
    return acc;
  }

  friend Series1 operator+(const Series1& a, const Series1& b) {
    std::vector<Coeff> c(std::max(a.coeffs_.size(), b.coeffs_.size()), Coeff(0));
    for (std::size_t n = 0; n < c.size(); ++n) c[n] = a.coeff(n) + b.coeff(n);
    return Series1(std::move(c), std::min(a.radius_, b.radius_));
  }

  friend Series1 operator-(const Series1& a, const Series1& b) {
    std::vector<Coeff> c(std::max(a.coeffs_.size(), b.coeffs_.size()), Coeff(0));
    for (std::size_t n = 0; n < c.size(); ++n) c[n] = a.coeff(n) - b.coeff(n);
    return Series1(std::move(c), std::min(a.radius_, b.radius_));
  }

  friend Series1 operator*(const Coeff& s, const Series1& a) {
    std::vector<Coeff> c = a.coeffs_;
    for (Coeff& x : c) x = s * x;
    return Series1(std::move(c), a.radius_);
  }

  Series1 derivative() const {
    if (coeffs_.size() == 1) return zero();
    std::vector<Coeff> c(coeffs_.size() - 1);
    for (std::size_t n = 1; n < coeffs_.size(); ++n)
      c[n - 1] = coeffs_[n] * Coeff(static_cast<double>(n));
    return Series1(std::move(c), radius_);
  }

 private:
  std::vector<Coeff> coeffs_;
  double radius_;
};

using PowerSeries1D = Series1<double>;

/// Cauchy product truncated at order nmax.
template <typename Coeff>
Series1<Coeff> mul(const Series1<Coeff>& a, const Series1<Coeff>& b,
                   std::size_t nmax = kSeriesOrder) {
  std::vector<Coeff> c(
      std::min(nmax, a.order() + b.order()) + 1, Coeff(0));
  for (std::size_t i = 0; i <= a.order(); ++i) {
    if (a.coeffs()[i] == Coeff(0)) continue;
    for (std::size_t j = 0; j <= b.order() && i + j < c.size(); ++j)
      c[i + j] += a.coeffs()[i] * b.coeffs()[j];
  }
  return Series1<Coeff>(std::move(c), std::min(a.radius(), b.radius()));
}

/// Formal composition f(g(z)) truncated at nmax.  Requires g(0) = 0, the
/// standard condition for composition of truncations to be well defined.
template <typename Coeff>
Series1<Coeff> compose(const Series1<Coeff>& f, const Series1<Coeff>& g,
                       std::size_t nmax = kSeriesOrder) {
  if (g.coeff(0) != Coeff(0))
    throw std::invalid_argument("compose: inner series must vanish at 0");
  Series1<Coeff> acc({f.coeff(std::min(f.order(), nmax))});
  for (std::size_t n = std::min(f.order(), nmax); n-- > 0;) {
    acc = mul(acc, g, nmax) + Series1<Coeff>({f.coeff(n)});
  }
  acc.set_radius(g.radius());
  return acc;
}

/// Compositional inverse: the q with p(q(y)) = y + O(y^{nmax+1}).
/// Requires p(0) = 0 and p'(0) != 0.  Coefficients are solved order by
/// order; q_n is determined by the order-n coefficient of p(q).
template <typename Coeff>
Series1<Coeff> revert(const Series1<Coeff>& p, std::size_t nmax = kSeriesOrder) {
  if (p.coeff(0) != Coeff(0))
    throw std::invalid_argument("revert: series must vanish at 0");
  const Coeff p1 = p.coeff(1);
  if (std::abs(p1) < 1e-300)
    throw std::invalid_argument("revert: first-order coefficient must be nonzero");
  std::vector<Coeff> q(nmax + 1, Coeff(0));
  q[1] = Coeff(1) / p1;
  for (std::size_t n = 2; n <= nmax; ++n) {
    Series1<Coeff> qn(std::vector<Coeff>(q.begin(), q.begin() + n));
    Series1<Coeff> comp = compose(p.truncated(n), qn, n);
    q[n] = -comp.coeff(n) / p1;
  }
  return Series1<Coeff>(std::move(q));
}

/// Root-test estimate of the radius of convergence: 0.9 / max |a_n|^{1/n}
/// over the tail n > order/2, zeros skipped.  Requires at least 16 nonzero
/// coefficients so the tail carries real information; a zero tail (the
/// series is a polynomial up to truncation) returns the declared radius.
template <typename Coeff>
double estimate_radius(const Series1<Coeff>& s) {
  if (s.nonzero_count() < 16)
    throw std::invalid_argument(
        "estimate_radius: needs at least 16 nonzero coefficients");
  const std::size_t lo = s.order() / 2 + 1;
  double worst = 0.0;
  for (std::size_t n = lo; n <= s.order(); ++n) {
    double a = std::abs(s.coeffs()[n]);
    if (a == 0.0) continue;
    worst = std::max(worst, std::pow(a, 1.0 / static_cast<double>(n)));
  }
  if (worst == 0.0) return s.radius();
  return 0.9 / worst;
}

inline PowerSeries1D exp_series(std::size_t nmax = kSeriesOrder) {
  std::vector<double> c(nmax + 1);
  c[0] = 1.0;
  for (std::size_t n = 1; n <= nmax; ++n) c[n] = c[n - 1] / static_cast<double>(n);
  return PowerSeries1D(std::move(c));
}

inline PowerSeries1D sin_series(std::size_t nmax = kSeriesOrder) {
  std::vector<double> c(nmax + 1, 0.0);
  double f = 1.0;
  for (std::size_t n = 1; n <= nmax; ++n) {
    f /= static_cast<double>(n);
    if (n % 2 == 1) c[n] = (n % 4 == 1) ? f : -f;
  }
  return PowerSeries1D(std::move(c));
}

inline PowerSeries1D cos_series(std::size_t nmax = kSeriesOrder) {
  std::vector<double> c(nmax + 1, 0.0);
  c[0] = 1.0;
  double f = 1.0;
  for (std::size_t n = 1; n <= nmax; ++n) {
    f /= static_cast<double>(n);
    if (n % 2 == 0) c[n] = (n % 4 == 0) ? f : -f;
  }
  return PowerSeries1D(std::move(c));
}

namespace detail {

/// Shared index table for dense multivariate storage: all exponent vectors
/// in nvars variables with total degree <= degree, graded order, within a
/// degree block the first exponent decreases first.
struct MonomialTable {
  std::size_t nvars = 0;
  std::size_t degree = 0;
  std::vector<std::vector<int>> alphas;  // index -> exponents
  std::vector<int> degrees;              // index -> total degree

  // binom[n][k] for k <= nvars; n up to degree + nvars.
  std::vector<std::vector<std::size_t>> binom;

  std::size_t binomial(long n, long k) const {
    if (k < 0 || n < 0 || k > n) return 0;
    return binom[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
  }

  /// Algebraic rank of an exponent vector, consistent with the enumeration
  /// order of `alphas`.
  std::size_t rank(const std::vector<int>& alpha) const {
    const long m = static_cast<long>(nvars);
    long d = 0;
    for (int a : alpha) d += a;
    std::size_t r = binomial(d - 1 + m, m);  // all lower degrees
    long rem = d;
    for (long j = 0; j + 1 < m; ++j) {
      const long a = alpha[static_cast<std::size_t>(j)];
      const long q = m - j - 1;  // variables after position j
      r += binomial(rem - a - 1 + q, q);
      rem -= a;
    }
    return r;
  }

  static std::shared_ptr<const MonomialTable> get(std::size_t nvars,
                                                  std::size_t degree) {
    static std::mutex mu;
    static std::map<std::pair<std::size_t, std::size_t>,
                    std::shared_ptr<const MonomialTable>>
        cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(nvars, degree);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    auto t = std::make_shared<MonomialTable>();
    t->nvars = nvars;
    t->degree = degree;
    const std::size_t rows = degree + nvars + 1;
    t->binom.assign(rows, std::vector<std::size_t>(nvars + 1, 0));
    for (std::size_t n = 0; n < rows; ++n) {
      t->binom[n][0] = 1;
      for (std::size_t k = 1; k <= std::min(n, nvars); ++k)
        t->binom[n][k] =
            (n > 0 ? t->binom[n - 1][k - 1] +
                         (k <= n - 1 ? t->binom[n - 1][k] : 0)
                   : 0);
    }

    std::vector<int> cur(nvars, 0);
    auto emit = [&](int d) {
      t->alphas.push_back(cur);
      t->degrees.push_back(d);
    };
    std::function<void(std::size_t, int, int)> rec =
        [&](std::size_t pos, int rem, int d) {
          if (pos + 1 == nvars) {
            cur[pos] = rem;
            emit(d);
            cur[pos] = 0;
            return;
          }
          for (int b = rem; b >= 0; --b) {
            cur[pos] = b;
            rec(pos + 1, rem - b, d);
          }
          cur[pos] = 0;
        };
    for (int d = 0; d <= static_cast<int>(degree); ++d)
      rec(0, d, d);

    cache[key] = t;
    return t;
  }
};

}  // namespace detail

/// Dense multivariate truncated series: coefficients of all monomials up to
/// a total-degree bound.  Purely positional variables; callers attach their
/// own meaning (base coordinates, wedge parameters, ...).
template <typename Coeff>
class MultiSeriesT {
 public:
  MultiSeriesT(std::size_t nvars, std::size_t degree)
      : table_(detail::MonomialTable::get(check_dims(nvars, degree), degree)),
        coeffs_(table_->alphas.size(), Coeff(0)) {}

  using Term = std::pair<std::vector<int>, Coeff>;

  static MultiSeriesT from_terms(std::size_t nvars, std::size_t degree,
                                 const std::vector<Term>& terms) {
    MultiSeriesT s(nvars, degree);
    for (const auto& [alpha, c] : terms) s.add_term(alpha, c);
    return s;
  }

  std::size_t nvars() const { return table_->nvars; }
  std::size_t degree() const { return table_->degree; }
  const std::vector<Coeff>& coeffs() const { return coeffs_; }
  const std::vector<int>& alpha(std::size_t index) const {
    return table_->alphas[index];
  }

  Coeff coeff(const std::vector<int>& alpha) const {
    check_alpha(alpha);
    return coeffs_[table_->rank(alpha)];
  }

  void set_coeff(const std::vector<int>& alpha, Coeff c) {
    check_alpha(alpha);
    coeffs_[table_->rank(alpha)] = c;
  }

  void add_term(const std::vector<int>& alpha, Coeff c) {
    check_alpha(alpha);
    coeffs_[table_->rank(alpha)] += c;
  }

  std::size_t nonzero_count() const {
    std::size_t k = 0;
    for (const Coeff& c : coeffs_)
      if (c != Coeff(0)) ++k;
    return k;
  }

  bool is_zero() const { return nonzero_count() == 0; }

  /// Evaluation at a complex point, one power table per variable.
  Complex eval(const ComplexVector& args) const {
    if (args.size() != nvars())
      throw std::invalid_argument("MultiSeries: argument count mismatch");
    std::vector<std::vector<Complex>> pw(nvars());
    for (std::size_t j = 0; j < nvars(); ++j) {
      pw[j].resize(degree() + 1);
      pw[j][0] = Complex(1.0);
      for (std::size_t k = 1; k <= degree(); ++k) pw[j][k] = pw[j][k - 1] * args[j];
    }
    Complex acc(0.0);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      if (coeffs_[i] == Coeff(0)) continue;
      Complex term(coeffs_[i]);
      const auto& a = table_->alphas[i];
      for (std::size_t j = 0; j < nvars(); ++j)
        if (a[j] > 0) term *= pw[j][static_cast<std::size_t>(a[j])];
      acc += term;
    }
    return acc;
  }

  Complex eval(const std::vector<double>& args) const {
    ComplexVector c(args.size());
    for (std::size_t j = 0; j < args.size(); ++j) c[j] = args[j];
    return eval(c);
  }

  friend MultiSeriesT operator+(const MultiSeriesT& a, const MultiSeriesT& b) {
    a.check_shape(b);
    MultiSeriesT c = a;
    for (std::size_t i = 0; i < c.coeffs_.size(); ++i) c.coeffs_[i] += b.coeffs_[i];
    return c;
  }

  friend MultiSeriesT operator-(const MultiSeriesT& a, const MultiSeriesT& b) {
    a.check_shape(b);
    MultiSeriesT c = a;
    for (std::size_t i = 0; i < c.coeffs_.size(); ++i) c.coeffs_[i] -= b.coeffs_[i];
    return c;
  }

  friend MultiSeriesT operator*(const Coeff& s, const MultiSeriesT& a) {
    MultiSeriesT c = a;
    for (Coeff& x : c.coeffs_) x = s * x;
    return c;
  }

  /// Product with the shared total-degree cutoff; zero terms are skipped, so
  /// the cost tracks sparsity.
  friend MultiSeriesT operator*(const MultiSeriesT& a, const MultiSeriesT& b) {
    a.check_shape(b);
    MultiSeriesT c(a.nvars(), a.degree());
    const int dmax = static_cast<int>(a.degree());
    std::vector<int> sum(a.nvars());
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
      if (a.coeffs_[i] == Coeff(0)) continue;
      const auto& ai = a.table_->alphas[i];
      const int di = a.table_->degrees[i];
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) {
        if (b.coeffs_[j] == Coeff(0)) continue;
        if (di + b.table_->degrees[j] > dmax) continue;
        const auto& bj = b.table_->alphas[j];
        for (std::size_t v = 0; v < sum.size(); ++v) sum[v] = ai[v] + bj[v];
        c.coeffs_[c.table_->rank(sum)] += a.coeffs_[i] * b.coeffs_[j];
      }
    }
    return c;
  }

  MultiSeriesT derivative(std::size_t var) const {
    if (var >= nvars())
      throw std::invalid_argument("MultiSeries: derivative variable out of range");
    MultiSeriesT c(nvars(), degree());
    std::vector<int> beta(nvars());
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      if (coeffs_[i] == Coeff(0)) continue;
      const auto& a = table_->alphas[i];
      if (a[var] == 0) continue;
      beta = a;
      beta[var] -= 1;
      c.coeffs_[c.table_->rank(beta)] +=
          coeffs_[i] * Coeff(static_cast<double>(a[var]));
    }
    return c;
  }

  /// Substitutes one series per variable.  All substituted series share the
  /// output shape (nvars, degree); powers are memoized per variable.
  MultiSeriesT compose(const std::vector<MultiSeriesT>& args) const {
    if (args.size() != nvars())
      throw std::invalid_argument("MultiSeries: compose needs one series per variable");
    for (const auto& a : args) args[0].check_shape(a);
    const std::size_t out_n = args[0].nvars();
    const std::size_t out_d = args[0].degree();
    MultiSeriesT one(out_n, out_d);
    one.coeffs_[0] = Coeff(1);
    std::vector<std::vector<MultiSeriesT>> pw(nvars(), {one});
    auto power = [&](std::size_t j, int k) -> const MultiSeriesT& {
      auto& col = pw[j];
      while (col.size() <= static_cast<std::size_t>(k))
        col.push_back(col.back() * args[j]);
      return col[static_cast<std::size_t>(k)];
    };
    MultiSeriesT acc(out_n, out_d);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      if (coeffs_[i] == Coeff(0)) continue;
      const auto& a = table_->alphas[i];
      MultiSeriesT term = one;
      for (std::size_t j = 0; j < nvars(); ++j)
        if (a[j] > 0) term = term * power(j, a[j]);
      acc = acc + coeffs_[i] * term;
    }
    return acc;
  }

 private:
  static std::size_t check_dims(std::size_t nvars, std::size_t degree) {
    if (nvars == 0)
      throw std::invalid_argument("MultiSeries: needs at least one variable");
    if (degree > 64)
      throw std::invalid_argument("MultiSeries: degree bound too large");
    return nvars;
  }

  void check_alpha(const std::vector<int>& alpha) const {
    if (alpha.size() != nvars())
      throw std::invalid_argument("MultiSeries: exponent vector length mismatch");
    int d = 0;
    for (int a : alpha) {
      if (a < 0) throw std::invalid_argument("MultiSeries: negative exponent");
      d += a;
    }
    if (d > static_cast<int>(degree()))
      throw std::invalid_argument("MultiSeries: exponent exceeds degree bound");
  }

  void check_shape(const MultiSeriesT& other) const {
    if (table_ != other.table_)
      throw std::invalid_argument("MultiSeries: operand shape mismatch");
  }

  std::shared_ptr<const detail::MonomialTable> table_;
  std::vector<Coeff> coeffs_;
};

using MultiSeries = MultiSeriesT<double>;

/// Complex-analytic function backed by a real-coefficient univariate series,
/// on the disc of the given radius (capped by the declared radius).
inline AnalyticFunction complexify(const PowerSeries1D& s, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("complexify: radius must be positive and finite");
  if (radius > s.radius() + kDomainTol)
    throw std::invalid_argument("complexify: radius exceeds series radius");
  return AnalyticFunction(
      1, [s](const ComplexVector& p) { return s(p[0]); },
      DomainBox::disc(radius), Provenance::SeriesBacked);
}

/// Complex evaluation of a real-coefficient multivariate series on a
/// polydisc.  `complex_slots` marks which variables admit complex inputs;
/// the remaining slots must stay real (|Im| <= kDomainTol).  Empty means
/// all slots are complexified.
inline AnalyticFunction complexify(const MultiSeries& s,
                                   std::vector<double> polyradii,
                                   std::vector<bool> complex_slots = {}) {
  if (polyradii.size() != s.nvars())
    throw std::invalid_argument("complexify: one radius per variable required");
  if (!complex_slots.empty() && complex_slots.size() != s.nvars())
    throw std::invalid_argument("complexify: one slot flag per variable required");
  DomainBox box = DomainBox::polydisc(polyradii);
  AnalyticFunction::Membership member = nullptr;
  if (!complex_slots.empty()) {
    member = [box, complex_slots](const ComplexVector& p) {
      if (!box.contains(p)) return false;
      for (std::size_t j = 0; j < complex_slots.size(); ++j)
        if (!complex_slots[j] && std::abs(p[j].imag()) > kDomainTol) return false;
      return true;
    };
  }
  return AnalyticFunction(
      s.nvars(), [s](const ComplexVector& p) { return s.eval(p); }, box,
      Provenance::SeriesBacked, std::move(member));
}

}  // namespace reflexcr
