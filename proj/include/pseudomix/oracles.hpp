// oracles.hpp - independent checks: density validation, partial transpose,
// and recomputation of a pseudomixture report from raw data.
#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "pseudomix/core.hpp"
#include "pseudomix/pipeline.hpp"

namespace pseudomix {

/// Transposes the indices of one tensor factor (1 or 2).
template <typename Real>
HermitianState<Real> partial_transpose(const HermitianState<Real>& rho, int factor) {
  if (factor != 1 && factor != 2) throw invalid_input("partial_transpose: factor must be 1 or 2");
  const BipartiteDims dims = rho.dims();
  CMatrix<Real> out(rho.dim(), rho.dim());
  for (Eigen::Index i = 0; i < dims.d1; ++i)
    for (Eigen::Index j = 0; j < dims.d2; ++j)
      for (Eigen::Index m = 0; m < dims.d1; ++m)
        for (Eigen::Index n = 0; n < dims.d2; ++n) {
          const auto src = factor == 1 ? rho(dims.index(m, j), dims.index(i, n))
                                       : rho(dims.index(i, n), dims.index(m, j));
          out(dims.index(i, j), dims.index(m, n)) = src;
        }
  return HermitianState<Real>(dims, std::move(out));
}

inline constexpr double ppt_floor = 1e-10;

template <typename Real>
struct PptVerdict {
  enum class Kind { PPT, NPT };
  Real min_pt_eigenvalue = 0;
  Kind verdict = Kind::PPT;
  bool decisive = false;  // PPT <=> separable holds for these dims

  bool npt() const { return verdict == Kind::NPT; }
  const char* name() const { return npt() ? "NPT" : "PPT"; }
};

/// PPT is necessary and sufficient for separability at 2x2, 2x3 (and 3x2),
/// and trivially when one factor is one-dimensional.
inline bool ppt_decisive(BipartiteDims dims) {
  const auto lo = std::min(dims.d1, dims.d2);
  const auto hi = std::max(dims.d1, dims.d2);
  return lo == 1 || (lo == 2 && hi <= 3);
}

template <typename Real>
PptVerdict<Real> ppt_check(const HermitianState<Real>& rho) {
  PptVerdict<Real> v;
  const HermitianState<Real> pt = partial_transpose(rho, 2);
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(pt.matrix(), Eigen::EigenvaluesOnly);
  v.min_pt_eigenvalue = es.eigenvalues().minCoeff();
  v.verdict = v.min_pt_eigenvalue < -Real(ppt_floor) ? PptVerdict<Real>::Kind::NPT
                                                     : PptVerdict<Real>::Kind::PPT;
  v.decisive = ppt_decisive(rho.dims());
  return v;
}

struct Violation {
  enum class Kind { shape, hermiticity, trace, positivity };
  Kind kind;
  double magnitude;  // measured defect

  std::string describe() const {
    std::ostringstream os;
    os.precision(6);
    switch (kind) {
      case Kind::shape: os << "matrix is not square"; break;
      case Kind::hermiticity: os << "not Hermitian: max |M - M^dagger| = " << magnitude; break;
      case Kind::trace: os << "trace off by " << magnitude; break;
      case Kind::positivity: os << "negative eigenvalue " << -magnitude; break;
    }
    return os.str();
  }
};

/// Violations of the density-matrix conditions; empty when m is Hermitian,
/// has unit trace, and has no eigenvalue below -tol (all within tol).
template <typename Derived>
std::vector<Violation> validate_density(const Eigen::MatrixBase<Derived>& m, double tol) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  std::vector<Violation> out;
  if (m.rows() != m.cols() || m.rows() == 0) {
    out.push_back({Violation::Kind::shape, 0.0});
    return out;
  }
  const double herm = double(hermitian_defect(m));
  if (herm > tol) out.push_back({Violation::Kind::hermiticity, herm});
  const double tr_err = std::abs(double(std::real(m.trace())) - 1.0);
  if (tr_err > tol) out.push_back({Violation::Kind::trace, tr_err});
  const Mat hpart = (m + m.adjoint()) / 2;
  Eigen::SelfAdjointEigenSolver<Mat> es(hpart, Eigen::EigenvaluesOnly);
  const double lo = double(es.eigenvalues().minCoeff());
  if (lo < -tol) out.push_back({Violation::Kind::positivity, -lo});
  return out;
}

struct Check {
  std::string name;
  bool passed = false;
  double measured = 0;
  double threshold = 0;
};

struct VerificationSummary {
  std::vector<Check> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
  const Check* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Recomputes every claim of a pseudomixture against the original state.
template <typename Real>
VerificationSummary verify_report(const HermitianState<Real>& rho, const Pseudomixture<Real>& p) {
  if (!(rho.dims() == p.dims)) throw invalid_input("verify_report: dimension mismatch");
  const BipartiteDims dims = rho.dims();
  for (const auto* list : {&p.plus_terms, &p.minus_terms})
    for (const auto& t : *list)
      if (t.vec1.size() != dims.d1 || t.vec2.size() != dims.d2)
        throw invalid_input("verify_report: term vector length mismatch");

  VerificationSummary out;
  auto add = [&](std::string name, bool ok, double measured, double threshold) {
    out.checks.push_back({std::move(name), ok, measured, threshold});
  };

  const double ab = std::abs(double(p.a - p.b) - 1.0);
  add("a_minus_b_is_one", ab <= 1e-9, ab, 1e-9);
  add("a_b_nonnegative", p.a >= 0 && p.b >= 0, double(std::min(p.a, p.b)), 0.0);

  double worst_norm = 0;
  bool positive = true;
  for (const auto* list : {&p.plus_terms, &p.minus_terms})
    for (const auto& t : *list) {
      worst_norm = std::max({worst_norm, std::abs(double(t.vec1.norm()) - 1.0),
                             std::abs(double(t.vec2.norm()) - 1.0)});
      positive = positive && t.weight > 0;
    }
  add("term_vectors_normalized", worst_norm <= 1e-10, worst_norm, 1e-10);
  add("mixture_weights_positive", positive, 0.0, 0.0);

  auto part_defect = [&](const std::vector<ProductTerm<Real>>& terms) {
    double worst = 0;
    for (const auto& v : validate_density(sum_terms(terms, dims), 1e-9))
      worst = std::max(worst, v.kind == Violation::Kind::shape ? 1.0 : v.magnitude);
    return worst;
  };
  const double plus_defect = p.plus_terms.empty() ? 1.0 : part_defect(p.plus_terms);
  add("plus_part_is_density", plus_defect == 0, plus_defect, 1e-9);
  if (p.minus_terms.empty()) {
    add("minus_part_is_density", p.b == 0, double(p.b), 0.0);
  } else {
    const double minus_defect = part_defect(p.minus_terms);
    add("minus_part_is_density", minus_defect == 0, minus_defect, 1e-9);
  }

  CMatrix<Real> recon = p.a * sum_terms(p.plus_terms, dims);
  if (!p.minus_terms.empty()) recon -= p.b * sum_terms(p.minus_terms, dims);
  const double err = double((rho.matrix() - recon).norm());
  const double bound = double(p.residual_hs) + 1e-9;
  add("reconstruction", err <= bound, err, bound);

  // With b = 0 and the claimed residual r, rho is a separable part plus an
  // error of HS norm at most r + 1e-9. The partial transpose is an HS
  // isometry, so its spectrum can then dip below zero by at most that much;
  // anything deeper forces a negative part.
  const PptVerdict<Real> ppt = ppt_check(rho);
  const double depth = -(bound + ppt_floor);
  const bool needs_minus = ppt.npt() && double(ppt.min_pt_eigenvalue) < depth;
  add("entanglement_consistency", !needs_minus || p.b > 0, double(ppt.min_pt_eigenvalue), depth);
  return out;
}

}  // namespace pseudomix
