#pragma once

// Edge-of-the-wedge extension: a function holomorphic on two opposite
// wedges and continuous on the shared edge extends to a full neighborhood.
// The extension is constructive: a Moebius kernel sweeps the wedges and an
// averaging integral over the unit circle produces the extension.

#include <algorithm>
#include <cmath>

#include "reflexcr/core.hpp"
#include "reflexcr/linalg.hpp"
#include "reflexcr/wedge.hpp"

namespace reflexcr {

/// Kernel constant; chosen so the kernel stays bounded and sign-definite on
/// the closed bidisc.
inline const double kMobiusC = std::sqrt(2.0) - 1.0;

/// The kernel (w + lambda/c) / (1 + c lambda w) on the closed bidisc.
inline Complex mobius_phi(Complex w, Complex lambda) {
  if (std::abs(w) > 1.0 + 1e-9 || std::abs(lambda) > 1.0 + 1e-9)
    throw std::domain_error("mobius_phi: arguments must lie in the closed bidisc");
  const Complex den = 1.0 + kMobiusC * lambda * w;
  // |1 + c lambda w| >= 1 - c > 0.58 on the bidisc; anything smaller means
  // the preconditions were violated upstream.
  if (std::abs(den) < 1e-14)
    throw std::runtime_error("mobius_phi: singular kernel denominator");
  return (w + lambda / kMobiusC) / den;
}

/// Imaginary part of the kernel by the explicit real formula
///   [(1-|lambda|^2) Im(cw) + (1-|cw|^2) Im(lambda)] / (c |1+c lambda w|^2).
/// Independent of mobius_phi; used as a cross-check and as the sign
/// witness: both numerator terms carry the sign of Im(lambda) when |lambda|=1.
inline double mobius_phi_im(Complex w, Complex lambda) {
  if (std::abs(w) > 1.0 + 1e-9 || std::abs(lambda) > 1.0 + 1e-9)
    throw std::domain_error("mobius_phi_im: arguments must lie in the closed bidisc");
  const Complex cw = kMobiusC * w;
  const Complex den = 1.0 + kMobiusC * lambda * w;
  const double n = (1.0 - std::norm(lambda)) * cw.imag() +
                   (1.0 - std::norm(cw)) * lambda.imag();
  return n / (kMobiusC * std::norm(den));
}

/// Componentwise kernel sweep of the polydisc.
inline ComplexVector build_Phi(const ComplexVector& w, Complex lambda) {
  ComplexVector out(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) out[j] = mobius_phi(w[j], lambda);
  return out;
}

/// Two opposite wedges over a flat edge: W+- = E +- iV with E a real box
/// and V = cone intersected with a ball.
class EOWDomain {
 public:
  enum class Region { Edge, UpperWedge, LowerWedge, Outside };

  EOWDomain(std::vector<double> edge_radii, Cone cone, double ball_radius)
      : edge_radii_(std::move(edge_radii)),
        cone_(std::move(cone)),
        ball_radius_(ball_radius) {
    if (edge_radii_.empty() || edge_radii_.size() != cone_.dimension())
      throw std::invalid_argument("EOWDomain: edge box must match the cone dimension");
    for (double r : edge_radii_)
      if (!(r > 0.0)) throw std::invalid_argument("EOWDomain: edge radii must be positive");
    if (!(ball_radius_ > 0.0))
      throw std::invalid_argument("EOWDomain: ball radius must be positive");
  }

  std::size_t dim() const { return edge_radii_.size(); }
  const std::vector<double>& edge_radii() const { return edge_radii_; }
  const Cone& cone() const { return cone_; }
  double ball_radius() const { return ball_radius_; }

  Region classify(const ComplexVector& w) const {
    if (w.size() != dim()) return Region::Outside;
    std::vector<double> t(dim());
    double tmax = 0.0, tnorm = 0.0;
    for (std::size_t j = 0; j < dim(); ++j) {
      if (!is_finite(w[j])) return Region::Outside;
      if (std::abs(w[j].real()) > edge_radii_[j] + kDomainTol) return Region::Outside;
      t[j] = w[j].imag();
      tmax = std::max(tmax, std::abs(t[j]));
      tnorm += t[j] * t[j];
    }
    if (tmax <= 1e-12) return Region::Edge;
    if (std::sqrt(tnorm) > ball_radius_ + kDomainTol) return Region::Outside;
    if (cone_.contains(t)) return Region::UpperWedge;
    for (double& v : t) v = -v;
    if (cone_.contains(t)) return Region::LowerWedge;
    return Region::Outside;
  }

  bool contains(const ComplexVector& w) const {
    return classify(w) != Region::Outside;
  }

 private:
  std::vector<double> edge_radii_;
  Cone cone_;
  double ball_radius_;
};

/// Wraps a raw evaluator as a function whose domain is the two wedges plus
/// the edge.
inline AnalyticFunction wedge_function(const EOWDomain& dom,
                                       AnalyticFunction::Evaluator evaluator,
                                       Provenance tag = Provenance::BlackBox) {
  std::vector<double> box(dom.dim());
  for (std::size_t j = 0; j < dom.dim(); ++j)
    box[j] = std::hypot(dom.edge_radii()[j], dom.ball_radius());
  EOWDomain d = dom;
  return AnalyticFunction(
      dom.dim(), std::move(evaluator), DomainBox::polydisc(box), tag,
      [d](const ComplexVector& p) { return d.contains(p); });
}

/// Real-linear change of coordinates in the w block that carries the model
/// orthant cone into a target cone.  The containment is certified by
/// sampling at construction; an uncertified matrix is refused.
class NormalizationMap {
 public:
  NormalizationMap(std::vector<double> matrix, const Cone& target,
                   std::size_t samples = 400, unsigned seed = 2)
      : d_(target.dimension()), a_(std::move(matrix)) {
    if (a_.size() != d_ * d_)
      throw std::invalid_argument("NormalizationMap: matrix must be d x d");
    if (std::abs(detail::determinant(a_, d_)) <= 1e-12)
      throw std::invalid_argument("NormalizationMap: matrix is singular");

    std::vector<std::vector<double>> es;
    for (std::size_t j = 0; j < d_; ++j) {
      std::vector<double> e(d_, 0.0);
      e[j] = 1.0;
      es.push_back(std::move(e));
    }
    Cone orthant(d_, es, "model");
    ConeContainmentReport rep =
        cone_containment_check(orthant, a_, target, samples, seed);
    if (!rep.interior_pass)
      throw std::invalid_argument(
          "NormalizationMap: matrix does not carry the model cone into the "
          "target cone (margin " +
          std::to_string(rep.min_angle_margin_deg) + " deg)");
    certificate_ = rep;

    inv_.resize(d_ * d_);
    for (std::size_t col = 0; col < d_; ++col) {
      std::vector<double> rhs(d_, 0.0);
      rhs[col] = 1.0;
      std::vector<double> x = detail::solve_linear(a_, rhs, d_);
      for (std::size_t row = 0; row < d_; ++row) inv_[row * d_ + col] = x[row];
    }
  }

  /// Columns are the target cone's generators pulled toward the axis; only
  /// defined when the cone has exactly d generators.
  static NormalizationMap from_cone(const Cone& target, double shrink = 0.5) {
    const std::size_t d = target.dimension();
    if (target.generators().size() != d)
      throw std::invalid_argument(
          "NormalizationMap: cone is not simplicial; supply the matrix directly");
    const Cone inner = shrink < 1.0 ? target.shrunk(shrink) : target;
    std::vector<double> a(d * d);
    for (std::size_t col = 0; col < d; ++col)
      for (std::size_t row = 0; row < d; ++row)
        a[row * d + col] = inner.generators()[col][row];
    return NormalizationMap(std::move(a), target);
  }

  std::size_t dim() const { return d_; }
  const std::vector<double>& matrix() const { return a_; }
  const std::vector<double>& inverse() const { return inv_; }
  const ConeContainmentReport& certificate() const { return certificate_; }

  ComplexVector apply(const ComplexVector& w) const { return mul(a_, w); }
  ComplexVector apply_inverse(const ComplexVector& w) const { return mul(inv_, w); }

 private:
  ComplexVector mul(const std::vector<double>& m, const ComplexVector& w) const {
    if (w.size() != d_)
      throw std::invalid_argument("NormalizationMap: vector dimension mismatch");
    ComplexVector out(d_, Complex(0.0));
    for (std::size_t r = 0; r < d_; ++r)
      for (std::size_t c = 0; c < d_; ++c) out[r] += m[r * d_ + c] * w[c];
    return out;
  }

  std::size_t d_;
  std::vector<double> a_;
  std::vector<double> inv_;
  ConeContainmentReport certificate_;
};

/// Extension produced by the averaging operator, together with the
/// composite normalization that was applied.
struct EowExtension {
  AnalyticFunction G;
  double scale = 0.0;              // sigma: model coordinates are w / sigma
  std::vector<double> forward;     // B = sigma * A, model -> user
  std::vector<double> inverse;     // B^{-1}
  std::size_t nodes = 0;
};

namespace detail {

inline ComplexVector apply_matrix(const std::vector<double>& m, std::size_t d,
                                  const ComplexVector& w) {
  ComplexVector out(d, Complex(0.0));
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) out[r] += m[r * d + c] * w[c];
  return out;
}

}  // namespace detail

/// The averaging extension: G(w) = mean over the unit circle of
/// g(B Phi(B^{-1} w, lambda)), where B = sigma A is scaled so the kernel
/// sweep never leaves g's wedges.  The kernel keeps |Phi| < 6 on the model
/// polydisc, so sigma is chosen to fit the 6-fold model box inside the edge
/// and the 6 sqrt(d)-fold model cone inside the cone ball.
inline EowExtension eow_extend(const AnalyticFunction& g, const EOWDomain& dom,
                               const NormalizationMap& norm,
                               std::size_t nodes = 256) {
  const std::size_t d = dom.dim();
  if (g.arity() != d)
    throw std::invalid_argument("eow_extend: function arity must match the domain");
  if (norm.dim() != d)
    throw std::invalid_argument("eow_extend: normalization dimension mismatch");
  if (nodes < 4)
    throw std::invalid_argument("eow_extend: too few quadrature nodes");

  const std::vector<double>& a = norm.matrix();
  double sigma = std::numeric_limits<double>::infinity();
  double frob = 0.0;
  for (std::size_t r = 0; r < d; ++r) {
    double rowsum = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      rowsum += std::abs(a[r * d + c]);
      frob += a[r * d + c] * a[r * d + c];
    }
    sigma = std::min(sigma, dom.edge_radii()[r] / (6.0 * rowsum));
  }
  frob = std::sqrt(frob);
  sigma = std::min(sigma,
                   dom.ball_radius() / (6.0 * std::sqrt(static_cast<double>(d)) * frob));

  std::vector<double> fwd(d * d), inv(d * d);
  for (std::size_t i = 0; i < d * d; ++i) {
    fwd[i] = sigma * a[i];
    inv[i] = norm.inverse()[i] / sigma;
  }

  auto eval = [g, fwd, inv, d, nodes](const ComplexVector& p) {
    ComplexVector wt = detail::apply_matrix(inv, d, p);
    Complex acc(0.0);
    for (std::size_t k = 0; k < nodes; ++k) {
      const double theta = 2.0 * kPi * static_cast<double>(k) /
                           static_cast<double>(nodes);
      const Complex lambda(std::cos(theta), std::sin(theta));
      ComplexVector q = detail::apply_matrix(fwd, d, build_Phi(wt, lambda));
      try {
        acc += g(q);
      } catch (const std::domain_error& e) {
        throw std::domain_error(
            "eow_extend: quadrature left the wedge domain at node " +
            std::to_string(k) + " (theta=" + std::to_string(theta) + "), point " +
            detail::fmt_point(q) + ": " + e.what());
      }
    }
    return acc / static_cast<double>(nodes);
  };

  std::vector<double> box(d);
  for (std::size_t r = 0; r < d; ++r) {
    double rowsum = 0.0;
    for (std::size_t c = 0; c < d; ++c) rowsum += std::abs(fwd[r * d + c]);
    box[r] = rowsum;
  }
  auto member = [inv, d](const ComplexVector& p) {
    ComplexVector wt = detail::apply_matrix(inv, d, p);
    for (Complex c : wt)
      if (std::abs(c) > 1.0 + kDomainTol) return false;
    return true;
  };
  AnalyticFunction G(d, std::move(eval), DomainBox::polydisc(box),
                     Provenance::ConstructedExtension, std::move(member));
  return EowExtension{std::move(G), sigma, std::move(fwd), std::move(inv), nodes};
}

}  // namespace reflexcr
