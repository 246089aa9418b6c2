// pipeline.hpp - iterated diagonal extraction and pseudomixture assembly
#pragma once

#include <algorithm>
#include <functional>
#include <type_traits>
#include <vector>

#include "pseudomix/core.hpp"
#include "pseudomix/search.hpp"
#include "pseudomix/split.hpp"

namespace pseudomix {

struct PipelineConfig {
  double tol_residual = 1e-8;  // stop once ||H(n)||_F drops to this
  int max_steps = 2000;
  double weight_prune = 1e-12;
  bool coalesce = false;
  SearchConfig search;

  void validate() const {
    if (!(tol_residual > 0)) throw invalid_input("tol_residual must be positive");
    if (max_steps < 1) throw invalid_input("max_steps must be >= 1");
    if (!(weight_prune >= 0)) throw invalid_input("weight_prune must be non-negative");
    search.validate();
  }
};

template <typename Real>
struct StepStat {
  int step = 0;
  Real tr_a2 = 0;
  Real tr_h2_before = 0;
  Real tr_h2_after = 0;
  Real objective = 0;
  Real residual_hs = 0;
  bool used_probe_fallback = false;
};

/// rho = sum(terms) + residual, exactly up to rounding.
template <typename Real>
struct Decomposition {
  HermitianState<Real> input;
  std::vector<ProductTerm<Real>> terms;
  HermitianState<Real> residual;
  std::vector<StepStat<Real>> stats;
  bool converged = false;

  Real residual_hs() const { return fro_norm(residual); }
  Real residual_op() const { return op_norm(residual); }
  int steps() const { return static_cast<int>(stats.size()); }

  /// ||input - (sum of terms + residual)||_F recomputed from scratch.
  Real bookkeeping_error() const {
    return (input.matrix() - sum_terms(terms, input.dims()) - residual.matrix()).norm();
  }
};

/// Thrown when the search stalls on a remainder that is still above tolerance.
template <typename Real>
class decomposition_stall : public stall_error {
 public:
  decomposition_stall(const std::string& what, Decomposition<Real> partial)
      : stall_error(what), partial_(std::move(partial)) {}
  const Decomposition<Real>& partial() const { return partial_; }

 private:
  Decomposition<Real> partial_;
};

/// Called after every extraction step with the decomposition so far.
template <typename Real>
using StepObserver = std::function<void(const Decomposition<Real>&)>;

template <typename Real>
Decomposition<Real> decompose(const HermitianState<Real>& rho, const PipelineConfig& cfg,
                              const std::type_identity_t<StepObserver<Real>>& observer = {}) {
  cfg.validate();
  // Re-validate as a density matrix; throws invalid_input on failure.
  HermitianState<Real>::density(rho.dims(), rho.matrix());

  Decomposition<Real> d{rho, {}, rho, {}, false};
  Real h2 = rho.matrix().squaredNorm();
  const Real tol = Real(cfg.tol_residual);
  const Real prune = Real(cfg.weight_prune);

  for (int step = 1; std::sqrt(h2) > tol && step <= cfg.max_steps; ++step) {
    SearchConfig search = cfg.search;
    search.seed = stream_seed(cfg.search.seed, static_cast<std::uint64_t>(step));
    SearchResult<Real> best;
    try {
      best = maximize(d.residual, search);
    } catch (const stall_error& e) {
      throw decomposition_stall<Real>(e.what(), d);
    }
    SplitResult<Real> s = split(d.residual, best.basis);
    if (!(s.tr_a2 > Real(0))) {
      throw decomposition_stall<Real>("extraction step " + std::to_string(step) +
                                          " produced an empty diagonal",
                                      d);
    }
    for (auto& t : diag_to_terms(s, prune, step)) d.terms.push_back(std::move(t));
    StepStat<Real> st;
    st.step = step;
    st.tr_a2 = s.tr_a2;
    st.tr_h2_before = h2;
    st.tr_h2_after = s.tr_h2;
    st.objective = best.objective;
    st.residual_hs = std::sqrt(s.tr_h2);
    st.used_probe_fallback = best.used_probe_fallback;
    d.stats.push_back(st);
    d.residual = std::move(s.remainder);
    h2 = st.tr_h2_after;
    if (observer) observer(d);
  }
  d.converged = std::sqrt(h2) <= tol;
  return d;
}

/// |<a1|b1>|^2 |<a2|b2>|^2 for two product projectors.
template <typename Real>
Real projector_fidelity(const ProductTerm<Real>& a, const ProductTerm<Real>& b) {
  return std::norm(a.vec1.dot(b.vec1)) * std::norm(a.vec2.dot(b.vec2));
}

/// Merges terms whose projectors nearly coincide by adding their weights.
/// The residual is recomputed so that input = terms + residual still holds.
template <typename Real>
Decomposition<Real> coalesce(const Decomposition<Real>& d, Real prune = Real(1e-12),
                             Real fidelity = Real(1) - Real(1e-10)) {
  std::vector<ProductTerm<Real>> merged;
  for (const auto& t : d.terms) {
    auto it = std::find_if(merged.begin(), merged.end(),
                           [&](const auto& m) { return projector_fidelity(m, t) > fidelity; });
    if (it == merged.end()) {
      merged.push_back(t);
    } else {
      it->weight += t.weight;
    }
  }
  std::erase_if(merged, [&](const auto& t) { return std::abs(t.weight) <= prune; });
  Decomposition<Real> out = d;
  out.terms = std::move(merged);
  out.residual = HermitianState<Real>(
      d.input.dims(), d.input.matrix() - sum_terms(out.terms, d.input.dims()));
  return out;
}

/// rho = a * rho_plus - b * rho_minus with rho_plus, rho_minus convex
/// mixtures of product projectors (weights positive, summing to one).
template <typename Real>
struct Pseudomixture {
  BipartiteDims dims;
  Real a = 1;
  Real b = 0;
  std::vector<ProductTerm<Real>> plus_terms;
  std::vector<ProductTerm<Real>> minus_terms;
  Real residual_hs = 0;
};

template <typename Real>
Pseudomixture<Real> assemble(const Decomposition<Real>& d, Real weight_prune = Real(1e-12)) {
  if (d.terms.empty()) throw invalid_input("assemble: decomposition has no terms");
  Pseudomixture<Real> p;
  p.dims = d.input.dims();
  p.residual_hs = d.residual_hs();
  Real plus = 0, minus = 0;
  for (const auto& t : d.terms) {
    if (t.weight > weight_prune) {
      p.plus_terms.push_back(t);
      plus += t.weight;
    } else if (t.weight < -weight_prune) {
      p.minus_terms.push_back(t);
      minus -= t.weight;
    }
  }
  if (!(plus > Real(0))) throw invalid_input("assemble: no positive weights");
  for (auto& t : p.plus_terms) t.weight /= plus;
  for (auto& t : p.minus_terms) t.weight = -t.weight / minus;
  // Trace conservation makes plus - minus = 1 up to rounding; pin it exactly.
  p.b = p.minus_terms.empty() ? Real(0) : minus;
  p.a = Real(1) + p.b;
  return p;
}

template <typename Real>
HermitianState<Real> reconstruct(const Pseudomixture<Real>& p, BipartiteDims dims) {
  CMatrix<Real> m = p.a * sum_terms(p.plus_terms, dims);
  if (!p.minus_terms.empty()) m -= p.b * sum_terms(p.minus_terms, dims);
  return HermitianState<Real>(dims, std::move(m));
}

}  // namespace pseudomix
