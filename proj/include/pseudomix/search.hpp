// search.hpp - maximization of Tr A^2 over product unitaries U(d1) x U(d2)
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numbers>
#include <thread>
#include <vector>

#include "pseudomix/core.hpp"
#include "pseudomix/split.hpp"

namespace pseudomix {

struct SearchConfig {
  int restarts = 8;
  int max_sweeps = 200;
  double sweep_tol = 1e-10;  // relative objective gain per sweep below which ascent stops
  int angle_grid = 16;
  double stall_floor = 1e-14;  // relative to ||M||_F^2
  std::uint64_t seed = 0;
  int threads = 1;  // restarts run concurrently; result does not depend on this

  void validate() const {
    if (restarts < 1) throw invalid_input("restarts must be >= 1");
    if (max_sweeps < 1) throw invalid_input("max_sweeps must be >= 1");
    if (!(sweep_tol > 0 && sweep_tol < 1)) throw invalid_input("sweep_tol must lie in (0, 1)");
    if (angle_grid < 2) throw invalid_input("angle_grid must be >= 2");
    if (!(stall_floor > 0)) throw invalid_input("stall_floor must be positive");
    if (threads < 1) throw invalid_input("threads must be >= 1");
  }
};

template <typename Real>
struct SearchResult {
  UnitaryPair<Real> basis;
  Real objective = 0;
  int sweeps_used = 0;
  int restarts_used = 0;
  bool used_probe_fallback = false;
  std::vector<Real> history;  // objective after each accepted sweep, starting at the init
};

namespace detail {

/// Two-level rotation acting on coordinates (p, q):
///   col p -> cos(theta) e_p + e^{i phi} sin(theta) e_q
///   col q -> -e^{-i phi} sin(theta) e_p + cos(theta) e_q
template <typename Real>
struct Rotation {
  Eigen::Index p = 0;
  Eigen::Index q = 0;
  Real theta = 0;
  Real phi = 0;

  Real c() const { return std::cos(theta); }
  Complex<Real> s() const { return std::polar(std::sin(theta), phi); }  // e^{i phi} sin

  /// m <- m * G on columns p, q.
  template <typename Mat>
  void apply_right(Mat& m, Eigen::Index cp, Eigen::Index cq) const {
    const Real cc = c();
    const Complex<Real> ss = s();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const Complex<Real> a = m(r, cp);
      const Complex<Real> b = m(r, cq);
      m(r, cp) = cc * a + ss * b;
      m(r, cq) = -std::conj(ss) * a + cc * b;
    }
  }

  /// m <- G^dagger * m on rows p, q.
  template <typename Mat>
  void apply_left_adjoint(Mat& m, Eigen::Index rp, Eigen::Index rq) const {
    const Real cc = c();
    const Complex<Real> ss = s();
    for (Eigen::Index col = 0; col < m.cols(); ++col) {
      const Complex<Real> a = m(rp, col);
      const Complex<Real> b = m(rq, col);
      m(rp, col) = cc * a + std::conj(ss) * b;
      m(rq, col) = -ss * a + cc * b;
    }
  }
};

template <typename Real>
CMatrix<Real> embed_rotation(Eigen::Index n, const Rotation<Real>& g) {
  CMatrix<Real> m = CMatrix<Real>::Identity(n, n);
  g.apply_right(m, g.p, g.q);
  return m;
}

/// Modified Gram-Schmidt in column order.
template <typename Real>
void orthonormalize(CMatrix<Real>& m) {
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    for (Eigen::Index j = 0; j < k; ++j) m.col(k) -= m.col(j).dot(m.col(k)) * m.col(j);
    m.col(k) /= m.col(k).norm();
  }
}

template <typename F>
double golden_max(F&& f, double lo, double hi, int iters) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < iters; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  return f1 < f2 ? x2 : x1;
}

/// Restricted to one two-level rotation, the pair's contribution to Tr A^2
/// is const + 2 n^T S n where n is the Bloch vector of the rotated column p
/// and S = sum_l b_l b_l^T collects the Pauli coefficients of each 2x2 block.
/// Returns the best rotation found by grid + golden-section refinement, or
/// theta = 0 if nothing beats the current point.
template <typename Real>
Rotation<Real> best_rotation(const Eigen::Matrix<Real, 3, 3>& s, Eigen::Index p, Eigen::Index q,
                             int grid) {
  auto value = [&](double theta, double phi) {
    const double st = std::sin(2 * theta);
    const Eigen::Matrix<Real, 3, 1> n(Real(st * std::cos(phi)), Real(-st * std::sin(phi)),
                                      Real(std::cos(2 * theta)));
    return double(n.dot(s * n));
  };
  const double current = value(0.0, 0.0);
  const double pi = std::numbers::pi;
  const double dtheta = (pi / 2) / grid;
  const double dphi = (2 * pi) / grid;

  double best_theta = 0, best_phi = 0, best = current;
  for (int a = 1; a <= grid; ++a) {
    for (int b = 0; b < grid; ++b) {
      const double th = a * dtheta;
      const double ph = b * dphi;
      const double val = value(th, ph);
      if (val > best) {
        best = val;
        best_theta = th;
        best_phi = ph;
      }
    }
  }
  // Alternate 1-D refinements in theta and phi around the grid winner.
  double th = best_theta, ph = best_phi;
  double w_theta = dtheta, w_phi = dphi;
  for (int round = 0; round < 4; ++round) {
    th = golden_max([&](double x) { return value(x, ph); }, th - w_theta, th + w_theta, 60);
    ph = golden_max([&](double x) { return value(th, x); }, ph - w_phi, ph + w_phi, 60);
    w_theta *= 0.5;
    w_phi *= 0.5;
  }
  const double refined = value(th, ph);
  if (refined > best) {
    best = refined;
    best_theta = th;
    best_phi = ph;
  }
  Rotation<Real> g{p, q, Real(0), Real(0)};
  const double scale = std::max(1.0, std::abs(double(s.trace())));
  if (best > current + 1e-15 * scale) {
    g.theta = Real(best_theta);
    g.phi = Real(best_phi);
  }
  return g;
}

/// One coordinate-ascent pass over every two-level rotation of `factor`,
/// updating `rotated` = W^dagger M W in place.
template <typename Real>
void sweep_factor(int factor, BipartiteDims dims, CMatrix<Real>& basis, CMatrix<Real>& rotated,
                  int grid) {
  const Eigen::Index n = factor == 1 ? dims.d1 : dims.d2;
  const Eigen::Index other = factor == 1 ? dims.d2 : dims.d1;
  auto composite = [&](Eigen::Index own, Eigen::Index o) {
    return factor == 1 ? dims.index(own, o) : dims.index(o, own);
  };
  for (Eigen::Index p = 0; p < n; ++p) {
    for (Eigen::Index q = p + 1; q < n; ++q) {
      Eigen::Matrix<Real, 3, 3> s = Eigen::Matrix<Real, 3, 3>::Zero();
      for (Eigen::Index o = 0; o < other; ++o) {
        const Eigen::Index a = composite(p, o);
        const Eigen::Index b = composite(q, o);
        const Complex<Real> off = rotated(a, b);
        const Eigen::Matrix<Real, 3, 1> bloch(off.real(), off.imag(),
                                              (rotated(a, a).real() - rotated(b, b).real()) / 2);
        s.noalias() += bloch * bloch.transpose();
      }
      const Rotation<Real> g = best_rotation<Real>(s, p, q, grid);
      if (g.theta == Real(0)) continue;
      g.apply_right(basis, p, q);
      for (Eigen::Index o = 0; o < other; ++o) {
        g.apply_right(rotated, composite(p, o), composite(q, o));
        g.apply_left_adjoint(rotated, composite(p, o), composite(q, o));
      }
    }
  }
}

struct ProbeVector {
  Eigen::Index i = 0;
  Eigen::Index m = -1;  // -1: plain basis vector e_i
  bool imaginary = false;  // (e_i + i e_m)/sqrt(2) instead of (e_i + e_m)/sqrt(2)

  template <typename Real>
  CVector<Real> vector(Eigen::Index n) const {
    CVector<Real> x = CVector<Real>::Zero(n);
    if (m < 0) {
      x(i) = 1;
    } else {
      const Real r = Real(1) / std::sqrt(Real(2));
      x(i) = r;
      x(m) = imaginary ? Complex<Real>(0, r) : Complex<Real>(r, 0);
    }
    return x;
  }

  /// Unitary whose column i is this probe vector (two-level rotation on (i, m)).
  template <typename Real>
  CMatrix<Real> completion(Eigen::Index n) const {
    if (m < 0) return CMatrix<Real>::Identity(n, n);
    const Rotation<Real> g{i, m, std::numbers::pi_v<Real> / 4,
                           imaginary ? std::numbers::pi_v<Real> / 2 : Real(0)};
    return embed_rotation<Real>(n, g);
  }
};

inline std::vector<ProbeVector> probe_family(Eigen::Index n) {
  std::vector<ProbeVector> out;
  for (Eigen::Index i = 0; i < n; ++i) out.push_back({i, -1, false});
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index m = i + 1; m < n; ++m) {
      out.push_back({i, m, false});
      out.push_back({i, m, true});
    }
  return out;
}

}  // namespace detail

/// Best product probe e (x) f by |<e f|M|e f>|, first in enumeration order on ties.
template <typename Real>
struct ProbeHit {
  detail::ProbeVector first;
  detail::ProbeVector second;
  Real expectation = 0;
};

template <typename Real>
ProbeHit<Real> best_probe(const HermitianState<Real>& m) {
  const BipartiteDims dims = m.dims();
  const auto fam1 = detail::probe_family(dims.d1);
  const auto fam2 = detail::probe_family(dims.d2);
  ProbeHit<Real> best{fam1.front(), fam2.front(), Real(0)};
  bool have = false;
  for (const auto& e : fam1) {
    const CVector<Real> ev = e.template vector<Real>(dims.d1);
    for (const auto& f : fam2) {
      const CVector<Real> x = kron(ev, f.template vector<Real>(dims.d2));
      const Real val = x.dot(m.matrix() * x).real();
      if (!have || std::abs(val) > std::abs(best.expectation)) {
        best = {e, f, val};
        have = true;
      }
    }
  }
  return best;
}

/// Basis built from the best pair probe, each factor completed by a
/// two-level rotation embedded in the identity.
template <typename Real>
SearchResult<Real> pair_probe(const HermitianState<Real>& m) {
  const ProbeHit<Real> hit = best_probe(m);
  const BipartiteDims dims = m.dims();
  UnitaryPair<Real> basis(hit.first.template completion<Real>(dims.d1),
                          hit.second.template completion<Real>(dims.d2));
  SearchResult<Real> out;
  out.objective = objective(m, basis);
  out.basis = std::move(basis);
  out.used_probe_fallback = true;
  out.history = {out.objective};
  return out;
}

/// Coordinate ascent over two-level rotations, first on u then on v, from init.
/// The recorded objective sequence is non-decreasing: a sweep that does not
/// improve the freshly recomputed objective is discarded.
template <typename Real>
SearchResult<Real> ascend(const HermitianState<Real>& m, const UnitaryPair<Real>& init,
                          const SearchConfig& cfg) {
  cfg.validate();
  if (!(init.dims() == m.dims())) throw invalid_input("ascend: basis dimension mismatch");
  const BipartiteDims dims = m.dims();

  UnitaryPair<Real> current = init;
  Real value = objective(m, current);
  SearchResult<Real> out;
  out.history.push_back(value);

  int sweeps = 0;
  while (sweeps < cfg.max_sweeps) {
    ++sweeps;
    CMatrix<Real> u = current.u();
    CMatrix<Real> v = current.v();
    const CMatrix<Real> w = current.composite();
    CMatrix<Real> rotated = w.adjoint() * m.matrix() * w;
    detail::sweep_factor<Real>(1, dims, u, rotated, cfg.angle_grid);
    detail::sweep_factor<Real>(2, dims, v, rotated, cfg.angle_grid);
    detail::orthonormalize(u);
    detail::orthonormalize(v);
    UnitaryPair<Real> candidate(std::move(u), std::move(v));
    const Real next = objective(m, candidate);
    if (!(next > value)) break;
    const Real gain = (next - value) / std::max(value, std::numeric_limits<Real>::min());
    current = std::move(candidate);
    value = next;
    out.history.push_back(value);
    if (gain < Real(cfg.sweep_tol)) break;
  }
  out.basis = std::move(current);
  out.objective = value;
  out.sweeps_used = sweeps;
  out.restarts_used = 1;
  return out;
}

/// Multi-restart maximization of Tr A^2. Restart 0 starts at the identity,
/// restart 1 at the best pair probe, the rest at Haar-random pairs drawn
/// from stream (seed, restart). The winner has the highest objective, ties
/// (relative 1e-12) going to the lowest restart index.
template <typename Real>
SearchResult<Real> maximize(const HermitianState<Real>& m, const SearchConfig& cfg) {
  cfg.validate();
  const Real norm2 = m.matrix().squaredNorm();
  if (!(norm2 > Real(0))) throw invalid_input("maximize: operator is zero");
  const BipartiteDims dims = m.dims();
  const std::size_t n = static_cast<std::size_t>(cfg.restarts);

  auto run = [&](std::size_t r) {
    if (r == 0) return ascend(m, UnitaryPair<Real>::identity(dims), cfg);
    if (r == 1) return ascend(m, pair_probe(m).basis, cfg);
    std::mt19937_64 rng(stream_seed(cfg.seed, r));
    CMatrix<Real> u = haar_unitary<Real>(dims.d1, rng);
    CMatrix<Real> v = haar_unitary<Real>(dims.d2, rng);
    return ascend(m, UnitaryPair<Real>(std::move(u), std::move(v)), cfg);
  };

  std::vector<SearchResult<Real>> results(n);
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), n);
  if (workers <= 1) {
    for (std::size_t r = 0; r < n; ++r) results[r] = run(r);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
          try {
            for (std::size_t r = t; r < n; r += workers) results[r] = run(r);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  // Objectives within a relative 1e-12 count as ties, so rounding noise
  // cannot hand the win to a later restart over an equivalent earlier one.
  std::size_t winner = 0;
  for (std::size_t r = 1; r < n; ++r) {
    const Real lead = results[winner].objective;
    if (results[r].objective > lead + Real(1e-12) * std::abs(lead)) winner = r;
  }
  SearchResult<Real> best = std::move(results[winner]);
  best.restarts_used = cfg.restarts;
  int sweeps = 0;
  for (const auto& res : results) sweeps += res.sweeps_used;
  best.sweeps_used = sweeps;

  const Real floor = Real(cfg.stall_floor) * norm2;
  if (best.objective <= floor) {
    SearchResult<Real> probe = pair_probe(m);
    if (probe.objective > best.objective) {
      probe.restarts_used = best.restarts_used;
      probe.sweeps_used = best.sweeps_used;
      best = std::move(probe);
    }
    best.used_probe_fallback = true;
    if (best.objective <= floor) {
      throw stall_error("no product basis with nonzero diagonal found (objective " +
                        std::to_string(double(best.objective)) + ", ||M||_F^2 " +
                        std::to_string(double(norm2)) + ")");
    }
  }
  return best;
}

}  // namespace pseudomix
