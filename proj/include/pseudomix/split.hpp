// split.hpp - product-basis pinching of a Hermitian operator
#pragma once

#include <vector>

#include "pseudomix/core.hpp"

namespace pseudomix {

/// Unitaries (u on factor 1, v on factor 2); column k of u (x) column l of v
/// is the rotated product basis vector at composite index k*d2 + l.
template <typename Real>
class UnitaryPair {
 public:
  UnitaryPair() = default;
  UnitaryPair(CMatrix<Real> u, CMatrix<Real> v) : u_(std::move(u)), v_(std::move(v)) {
    check(u_, "u");
    check(v_, "v");
  }

  static UnitaryPair identity(BipartiteDims dims) {
    return UnitaryPair(CMatrix<Real>::Identity(dims.d1, dims.d1),
                       CMatrix<Real>::Identity(dims.d2, dims.d2));
  }

  const CMatrix<Real>& u() const { return u_; }
  const CMatrix<Real>& v() const { return v_; }
  BipartiteDims dims() const { return {u_.rows(), v_.rows()}; }
  CMatrix<Real> composite() const { return kron(u_, v_); }

 private:
  static void check(const CMatrix<Real>& m, const char* name) {
    if (m.rows() != m.cols() || m.rows() < 1) {
      throw invalid_input(std::string("basis factor ") + name + " is not square");
    }
    const Real err = (m.adjoint() * m - CMatrix<Real>::Identity(m.rows(), m.cols())).norm();
    if (!(err <= Real(tol::unitary))) {
      throw invalid_input(std::string("basis factor ") + name + " is not unitary (defect " +
                          std::to_string(err) + ")");
    }
  }

  CMatrix<Real> u_;
  CMatrix<Real> v_;
};

/// One weighted projector onto a simple tensor vec1 (x) vec2.
template <typename Real>
struct ProductTerm {
  Real weight = 0;
  CVector<Real> vec1;
  CVector<Real> vec2;
  int step = 0;

  CVector<Real> product_vector() const { return kron(vec1, vec2); }
  CMatrix<Real> projector() const {
    const CVector<Real> x = product_vector();
    return x * x.adjoint();
  }
};

/// Sum of weight * projector over a term list.
template <typename Real>
CMatrix<Real> sum_terms(const std::vector<ProductTerm<Real>>& terms, BipartiteDims dims) {
  CMatrix<Real> out = CMatrix<Real>::Zero(dims.dim(), dims.dim());
  for (const auto& t : terms) {
    const CVector<Real> x = t.product_vector();
    out.noalias() += t.weight * (x * x.adjoint());
  }
  return out;
}

/// Diagonal weights (the component A) and off-diagonal remainder H of an
/// operator in one product basis. The remainder is kept in the original basis.
template <typename Real>
struct SplitResult {
  UnitaryPair<Real> basis;
  RVector<Real> diag_weights;  // indexed by k*d2 + l
  HermitianState<Real> remainder;
  Real tr_a2 = 0;
  Real tr_h2 = 0;

  CMatrix<Real> diag_part() const {
    const CMatrix<Real> w = basis.composite();
    return w * diag_weights.template cast<Complex<Real>>().asDiagonal() * w.adjoint();
  }
};

inline constexpr double weight_dust = 1e-12;

/// Pinches m onto the product basis: A = sum_kl w_kl |k l><k l| with
/// w_kl = <k l|m|k l>, H = m - A. H is the full complement of the diagonal,
/// so A + H reconstructs m and (A, H)_HS = 0.
template <typename Real>
SplitResult<Real> split(const HermitianState<Real>& m, const UnitaryPair<Real>& basis) {
  if (!(basis.dims() == m.dims())) throw invalid_input("split: basis dimension mismatch");
  const CMatrix<Real> w = basis.composite();
  const CMatrix<Real> mw = m.matrix() * w;
  RVector<Real> weights(m.dim());
  for (Eigen::Index c = 0; c < m.dim(); ++c) {
    const Real x = w.col(c).dot(mw.col(c)).real();
    weights(c) = std::abs(x) <= Real(weight_dust) ? Real(0) : x;
  }
  const CMatrix<Real> a = w * weights.template cast<Complex<Real>>().asDiagonal() * w.adjoint();
  CMatrix<Real> h = m.matrix() - a;
  h = (h + h.adjoint()).eval() * Real(0.5);

  SplitResult<Real> out{basis, weights, HermitianState<Real>(m.dims(), std::move(h)), 0, 0};
  out.tr_a2 = weights.squaredNorm();
  out.tr_h2 = out.remainder.matrix().squaredNorm();
  return out;
}

/// Tr A^2 for the pinching of m in the given basis, without forming H.
template <typename Real>
Real objective(const HermitianState<Real>& m, const UnitaryPair<Real>& basis) {
  if (!(basis.dims() == m.dims())) throw invalid_input("objective: basis dimension mismatch");
  const CMatrix<Real> w = basis.composite();
  const CMatrix<Real> mw = m.matrix() * w;
  Real sum = 0;
  for (Eigen::Index c = 0; c < m.dim(); ++c) {
    const Real x = w.col(c).dot(mw.col(c)).real();
    sum += x * x;
  }
  return sum;
}

/// Emits one ProductTerm per diagonal weight with |w| > prune.
template <typename Real>
std::vector<ProductTerm<Real>> diag_to_terms(const SplitResult<Real>& s, Real prune, int step = 0) {
  const BipartiteDims dims = s.basis.dims();
  std::vector<ProductTerm<Real>> terms;
  for (Eigen::Index k = 0; k < dims.d1; ++k) {
    for (Eigen::Index l = 0; l < dims.d2; ++l) {
      const Real wt = s.diag_weights(dims.index(k, l));
      if (std::abs(wt) <= prune) continue;
      terms.push_back({wt, s.basis.u().col(k), s.basis.v().col(l), step});
    }
  }
  return terms;
}

}  // namespace pseudomix
