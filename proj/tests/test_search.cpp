#include <doctest.h>

#include "pseudomix/search.hpp"
#include "test_util.hpp"

using namespace pseudomix;
using namespace testutil;

namespace {

/// Brute-force max of sum_kl <u_k v_l|M|u_k v_l>^2 over a grid of 2x2 unitaries
/// (column phases do not affect the objective, so two angles per factor suffice).
double grid_max_2x2(const Mat& m, int n) {
  const double pi = std::acos(-1.0);
  std::vector<Mat> us;
  for (int a = 0; a <= n; ++a)
    for (int b = 0; b < n; ++b) {
      const double th = (pi / 2) * a / n, ph = 2 * pi * b / n;
      Mat u(2, 2);
      u << std::cos(th), -std::polar(std::sin(th), -ph), std::polar(std::sin(th), ph), std::cos(th);
      us.push_back(u);
    }
  double best = 0;
  for (const auto& u : us)
    for (const auto& v : us) {
      double sum = 0;
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          Vec x(4);
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) x(2 * i + j) = u(i, k) * v(j, l);
          const double w = x.dot(m * x).real();
          sum += w * w;
        }
      best = std::max(best, sum);
    }
  return best;
}

bool same_pair(const UnitaryPair<double>& a, const UnitaryPair<double>& b) {
  return a.u().size() == b.u().size() && a.v().size() == b.v().size() &&
         std::memcmp(a.u().data(), b.u().data(), sizeof(cd) * a.u().size()) == 0 &&
         std::memcmp(a.v().data(), b.v().data(), sizeof(cd) * a.v().size()) == 0;
}

}  // namespace

TEST_CASE("Bell objective: grid oracle and maximize agree on 1/2") {
  const double oracle = grid_max_2x2(bell(), 24);
  CHECK(oracle <= 0.5 + 1e-12);
  CHECK(oracle >= 0.5 - 1e-12);  // the computational basis is on the grid

  const auto r = maximize(State({2, 2}, bell()), SearchConfig{});
  CHECK(std::abs(r.objective - 0.5) <= 1e-6);
  CHECK(std::abs(r.objective - objective(State({2, 2}, bell()), r.basis)) <= 1e-12);
}

TEST_CASE("maximize on a random 2x2 state does not lose to the grid oracle") {
  const auto rho = random_density<double>({2, 2}, 2, 31);
  const double oracle = grid_max_2x2(rho.matrix(), 24);
  const auto r = maximize(rho, SearchConfig{});
  CHECK(r.objective >= oracle - 1e-9);
}

TEST_CASE("maximize on trivial states") {
  Mat prod = Mat::Zero(4, 4);
  prod(0, 0) = 1;
  CHECK(std::abs(maximize(State({2, 2}, prod), SearchConfig{}).objective - 1.0) <= 1e-9);

  // A rotated product pure state must also be found.
  std::mt19937_64 rng(4);
  const Vec e = random_unitary(2, rng).col(0);
  const Vec f = random_unitary(3, rng).col(0);
  Vec x(6);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) x(3 * i + j) = e(i) * f(j);
  CHECK(std::abs(maximize(State({2, 3}, outer(x, x)), SearchConfig{}).objective - 1.0) <= 1e-9);

  const auto mixed = maximize(State({2, 2}, Mat::Identity(4, 4) / 4.0), SearchConfig{});
  CHECK(std::abs(mixed.objective - 0.25) < 1e-14);
}

TEST_CASE("ascend from an optimal init stops after one sweep") {
  const State q({2, 2}, Mat::Identity(4, 4) / 4.0);
  const auto r = ascend(q, UnitaryPair<double>::identity({2, 2}), SearchConfig{});
  CHECK(r.sweeps_used == 1);
  CHECK(std::abs(r.objective - 0.25) < 1e-15);

  const auto b = ascend(State({2, 2}, bell()), UnitaryPair<double>::identity({2, 2}), SearchConfig{});
  CHECK(std::abs(b.objective - 0.5) <= 1e-6);
}

TEST_CASE("ascent history is non-decreasing and the basis stays unitary") {
  std::mt19937_64 rng(8);
  const BipartiteDims dims(2, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto rho = random_density<double>(dims, 1 + trial % 6, 300 + trial);
    const UnitaryPair<double> init(random_unitary(2, rng), random_unitary(3, rng));
    const auto r = ascend(rho, init, SearchConfig{});
    for (std::size_t k = 1; k < r.history.size(); ++k) REQUIRE(r.history[k] >= r.history[k - 1]);
    CHECK(r.objective == r.history.back());
    CHECK(r.objective >= objective(rho, init));
    CHECK((r.basis.u().adjoint() * r.basis.u() - Mat::Identity(2, 2)).norm() <= 1e-12);
    CHECK((r.basis.v().adjoint() * r.basis.v() - Mat::Identity(3, 3)).norm() <= 1e-12);
  }
}

TEST_CASE("pair_probe on a state with empty computational diagonal") {
  Mat h = Mat::Zero(4, 4);
  h(0, 3) = h(3, 0) = 0.5;
  const State m({2, 2}, h);
  // |++> = (|00>+|01>+|10>+|11>)/2 gives (h03 + h30)/4 = 1/4.
  CHECK(std::abs(best_probe_oracle(h, m.dims()) - 0.25) < 1e-15);
  const auto hit = best_probe(m);
  CHECK(std::abs(hit.expectation) >= 1.0 / 8);
  CHECK(std::abs(std::abs(hit.expectation) - 0.25) < 1e-15);
  const auto r = pair_probe(m);
  CHECK(r.objective > 0);
  CHECK(r.objective >= hit.expectation * hit.expectation - 1e-15);
  CHECK(std::abs(r.objective - objective(m, r.basis)) == 0.0);
}

TEST_CASE("pair_probe on zero and diagonal operators") {
  CHECK(pair_probe(State::zero({2, 3})).objective <= 1e-14);

  Mat d = Mat::Zero(6, 6);
  d.diagonal() << 0.3, -0.5, 0.1, 0.1, 0.0, 0.0;
  const auto hit = best_probe(State({2, 3}, d));
  CHECK(hit.first.m < 0);
  CHECK(hit.second.m < 0);
  CHECK(hit.expectation == -0.5);
  const auto r = pair_probe(State({2, 3}, d));
  CHECK(std::abs(r.objective - d.diagonal().squaredNorm()) < 1e-15);
  CHECK(r.objective >= 0.25);

  Mat single = Mat::Zero(6, 6);
  single(4, 4) = 0.7;
  CHECK(std::abs(pair_probe(State({2, 3}, single)).objective - 0.49) < 1e-15);
}

TEST_CASE("probe family guarantees |expectation| >= max|entry| / 16") {
  std::mt19937_64 rng(123);
  double worst_ratio = 1e9;
  for (auto dims : {BipartiteDims(2, 2), BipartiteDims(2, 3)}) {
    for (int trial = 0; trial < 100; ++trial) {
      const Mat h = random_hermitian(dims.dim(), rng, /*traceless=*/true);
      const State m(dims, h);
      const double oracle = best_probe_oracle(m.matrix(), dims);
      const auto hit = best_probe(m);
      CHECK(std::abs(std::abs(hit.expectation) - oracle) < 1e-14);
      const double largest = m.matrix().cwiseAbs().maxCoeff();
      worst_ratio = std::min(worst_ratio, oracle / largest);
      CHECK(oracle >= largest / 16);
      CHECK(pair_probe(m).objective > 0);
    }
  }
  MESSAGE("worst best-probe / max-entry ratio: " << worst_ratio);
}

TEST_CASE("maximize is deterministic and thread-count independent") {
  const auto rho = random_density<double>({3, 3}, 4, 55);
  SearchConfig serial;
  serial.seed = 9;
  SearchConfig parallel = serial;
  parallel.threads = 4;
  const auto a = maximize(rho, serial);
  const auto b = maximize(rho, serial);
  const auto c = maximize(rho, parallel);
  CHECK(same_pair(a.basis, b.basis));
  CHECK(same_pair(a.basis, c.basis));
  CHECK(a.objective == c.objective);
  CHECK(a.sweeps_used == c.sweeps_used);
  CHECK(a.restarts_used == 8);
}

TEST_CASE("maximize beats its identity and probe starting points") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const State m({3, 2}, random_hermitian(6, rng, true));
    const auto r = maximize(m, SearchConfig{});
    CHECK(r.objective >= objective(m, UnitaryPair<double>::identity(m.dims())));
    CHECK(r.objective >= pair_probe(m).objective);
  }
}

TEST_CASE("maximize error paths") {
  CHECK_THROWS_AS(maximize(State::zero({2, 2}), SearchConfig{}), invalid_input);
  SearchConfig impossible;
  impossible.stall_floor = 10.0;  // no basis can reach 10 ||M||^2
  CHECK_THROWS_AS(maximize(State({2, 2}, bell()), impossible), stall_error);
  SearchConfig bad;
  bad.restarts = 0;
  CHECK_THROWS_AS(maximize(State({2, 2}, bell()), bad), invalid_input);
  bad = SearchConfig{};
  bad.sweep_tol = 1.0;
  CHECK_THROWS_AS(bad.validate(), invalid_input);
}
