// core.hpp - dense complex linear algebra on a bipartite Hilbert space
#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace pseudomix {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using CMatrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using CVector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// Raised for malformed or out-of-contract inputs.
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when the unitary search cannot find a nonzero product diagonal.
class stall_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace tol {
inline constexpr double hermitian = 1e-10;
inline constexpr double density = 1e-10;
inline constexpr double unitary = 1e-12;
}  // namespace tol

/// Dimensions of the two tensor factors. The basis vector e_i (x) f_j sits at
/// composite index i*d2 + j.
struct BipartiteDims {
  Eigen::Index d1 = 1;
  Eigen::Index d2 = 1;

  BipartiteDims() = default;
  BipartiteDims(Eigen::Index first, Eigen::Index second) : d1(first), d2(second) {
    if (d1 < 1 || d2 < 1) {
      throw invalid_input("factor dimensions must be positive, got " + std::to_string(d1) +
                          "x" + std::to_string(d2));
    }
  }

  Eigen::Index dim() const { return d1 * d2; }
  Eigen::Index index(Eigen::Index i, Eigen::Index j) const { return i * d2 + j; }
  std::pair<Eigen::Index, Eigen::Index> factor_indices(Eigen::Index composite) const {
    return {composite / d2, composite % d2};
  }

  friend bool operator==(const BipartiteDims&, const BipartiteDims&) = default;
};

/// Largest entry-wise deviation |M(r,c) - conj(M(c,r))|.
template <typename Derived>
auto hermitian_defect(const Eigen::MatrixBase<Derived>& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Hermitian operator on H1 (x) H2. Inputs whose asymmetry is within
/// tol::hermitian are symmetrized; anything worse is rejected.
template <typename Real>
class HermitianState {
 public:
  using Matrix = CMatrix<Real>;

  HermitianState() = default;

  HermitianState(BipartiteDims dims, Matrix entries) : dims_(dims), entries_(std::move(entries)) {
    if (entries_.rows() != dims_.dim() || entries_.cols() != dims_.dim()) {
      throw invalid_input("matrix is " + std::to_string(entries_.rows()) + "x" +
                          std::to_string(entries_.cols()) + ", expected " +
                          std::to_string(dims_.dim()) + "x" + std::to_string(dims_.dim()));
    }
    if (!entries_.allFinite()) throw invalid_input("matrix has non-finite entries");
    const Real defect = entries_.size() == 0 ? Real(0) : Real(hermitian_defect(entries_));
    if (defect > Real(tol::hermitian)) {
      throw invalid_input("matrix is not Hermitian (defect " + std::to_string(defect) + ")");
    }
    symmetrize();
  }

  /// Builds a state and additionally checks unit trace and positivity.
  static HermitianState density(BipartiteDims dims, Matrix entries) {
    HermitianState s(dims, std::move(entries));
    const Real tr = s.trace();
    if (std::abs(tr - Real(1)) > Real(tol::density)) {
      throw invalid_input("density matrix trace is " + std::to_string(tr));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.entries_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -Real(tol::density)) {
      throw invalid_input("density matrix has negative eigenvalue " +
                          std::to_string(es.eigenvalues().minCoeff()));
    }
    return s;
  }

  static HermitianState zero(BipartiteDims dims) {
    return HermitianState(dims, Matrix::Zero(dims.dim(), dims.dim()));
  }

  const BipartiteDims& dims() const { return dims_; }
  const Matrix& matrix() const { return entries_; }
  Eigen::Index dim() const { return dims_.dim(); }
  Complex<Real> operator()(Eigen::Index r, Eigen::Index c) const { return entries_(r, c); }
  Real trace() const { return entries_.diagonal().real().sum(); }

 private:
  void symmetrize() { entries_ = (entries_ + entries_.adjoint()).eval() * Real(0.5); }

  BipartiteDims dims_;
  Matrix entries_;
};

/// Eigenpairs of a Hermitian operator, eigenvalues in descending order.
template <typename Real>
struct SpectralDecomposition {
  RVector<Real> eigenvalues;
  CMatrix<Real> eigenvectors;  // column t is the t-th eigenvector

  CMatrix<Real> reconstruct() const {
    return eigenvectors * eigenvalues.template cast<Complex<Real>>().asDiagonal() *
           eigenvectors.adjoint();
  }
};

template <typename Real>
SpectralDecomposition<Real> eigh(const HermitianState<Real>& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(m.matrix());
  if (es.info() != Eigen::Success) throw invalid_input("eigendecomposition failed");
  const Eigen::Index n = m.dim();
  // Eigen returns ascending order; a stable sort keeps tie order deterministic.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  const auto& ev = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return ev(a) > ev(b); });
  SpectralDecomposition<Real> out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    out.eigenvalues(t) = ev(order[static_cast<std::size_t>(t)]);
    out.eigenvectors.col(t) = es.eigenvectors().col(order[static_cast<std::size_t>(t)]);
  }
  return out;
}

/// Hilbert-Schmidt inner product Tr X^dagger Y.
template <typename Real>
Complex<Real> hs_inner(const HermitianState<Real>& x, const HermitianState<Real>& y) {
  if (!(x.dims() == y.dims())) throw invalid_input("hs_inner: dimension mismatch");
  return (x.matrix().conjugate().cwiseProduct(y.matrix())).sum();
}

template <typename Derived>
auto fro_norm(const Eigen::MatrixBase<Derived>& x) {
  return x.norm();
}

template <typename Real>
Real fro_norm(const HermitianState<Real>& x) {
  return x.matrix().norm();
}

/// Spectral norm, i.e. the largest |eigenvalue| for Hermitian input.
template <typename Real>
Real op_norm(const HermitianState<Real>& x) {
  if (x.dim() == 0) return Real(0);
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(x.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Kronecker product a (x) b, with row index i*rows(b)+j.
template <typename Real>
CMatrix<Real> kron(const CMatrix<Real>& a, const CMatrix<Real>& b) {
  CMatrix<Real> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k)
      out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
  return out;
}

template <typename Real>
CVector<Real> kron(const CVector<Real>& a, const CVector<Real>& b) {
  CVector<Real> out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

/// SplitMix64 step; used to split one seed into independent streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

template <typename Real, typename Rng>
CMatrix<Real> ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<Real> normal(Real(0), Real(1));
  CMatrix<Real> g(rows, cols);
  // Fill order is fixed (column-major, re before im) for reproducibility.
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Real re = normal(rng);
      const Real im = normal(rng);
      g(r, c) = Complex<Real>(re, im);
    }
  return g;
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of R's
/// diagonal pushed into Q.
template <typename Real, typename Rng>
CMatrix<Real> haar_unitary(Eigen::Index n, Rng& rng) {
  CMatrix<Real> g = ginibre<Real>(n, n, rng);
  Eigen::HouseholderQR<CMatrix<Real>> qr(g);
  CMatrix<Real> q = qr.householderQ() * CMatrix<Real>::Identity(n, n);
  const CMatrix<Real>& r = qr.matrixQR();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Real mag = std::abs(r(k, k));
    if (mag > Real(0)) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

/// Random density matrix G G^dagger / Tr(G G^dagger) with G a D x rank
/// Ginibre matrix (induced measure).
template <typename Real = double>
HermitianState<Real> random_density(BipartiteDims dims, Eigen::Index rank, std::uint64_t seed) {
  if (rank < 1 || rank > dims.dim()) {
    throw invalid_input("rank must lie in [1, " + std::to_string(dims.dim()) + "], got " +
                        std::to_string(rank));
  }
  std::mt19937_64 rng(seed);
  const CMatrix<Real> g = ginibre<Real>(dims.dim(), rank, rng);
  CMatrix<Real> rho = g * g.adjoint();
  rho /= rho.trace().real();
  return HermitianState<Real>(dims, std::move(rho));
}

}  // namespace pseudomix
