#include "btc/evolution.hpp"
#include "btc/liouvillian.hpp"
#include "btc/spectrum.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace btc;
using Catch::Approx;

namespace {

CMatrix random_hermitian(Index d, std::mt19937& rng) {
  std::normal_distribution<double> g;
  CMatrix a(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
  }
  return 0.5 * (a + a.adjoint());
}

DensityMatrix random_state(const CollectiveSpinBasis& b, std::mt19937& rng) {
  std::normal_distribution<double> g;
  CMatrix a(b.dim(), b.dim());
  for (Index i = 0; i < b.dim(); ++i) {
    for (Index j = 0; j < b.dim(); ++j) a(i, j) = Complex(g(rng), g(rng));
  }
  CMatrix rho = a * a.adjoint();
  rho /= rho.trace();
  return DensityMatrix(b, 0.5 * (rho + rho.adjoint()));
}

}  // namespace

TEST_CASE("model parameter validation", "[liouvillian]") {
  CHECK_THROWS_AS(build_liouvillian({0.5, 0.0, 4}), std::invalid_argument);
  CHECK_THROWS_AS(build_liouvillian({0.5, -1.0, 4}), std::invalid_argument);
  CHECK_THROWS_AS(build_liouvillian({-0.5, 1.0, 4}), std::invalid_argument);
  CHECK_THROWS_AS(build_liouvillian({0.5, 1.0, 0}), std::invalid_argument);
}

TEST_CASE("density matrix invariants", "[liouvillian]") {
  const auto b = build_basis(2);
  CMatrix bad = CMatrix::Identity(3, 3);
  CHECK_THROWS_AS(DensityMatrix(b, bad), InvariantError);  // trace 3
  CMatrix neg = CMatrix::Zero(3, 3);
  neg(0, 0) = 1.1;
  neg(1, 1) = -0.1;
  CHECK_THROWS_AS(DensityMatrix(b, neg), InvariantError);
  CMatrix nonherm = CMatrix::Identity(3, 3) / 3.0;
  nonherm(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix(b, nonherm), InvariantError);
}

TEST_CASE("expectation values", "[liouvillian]") {
  const auto b = build_basis(6);
  const Operator sz = spin_operator(b, SpinAxis::z);
  CHECK(expectation(DensityMatrix::dicke_state(b, b.dim() - 1), sz) == Approx(-3.0));
  CHECK(std::abs(expectation(DensityMatrix::maximally_mixed(b), sz)) < 1e-15);
}

TEST_CASE("trace and Hermiticity preservation", "[liouvillian][property]") {
  std::mt19937 rng(7);
  for (int n : {1, 2, 5, 10, 20}) {
    for (double omega : {0.0, 0.5, 1.5}) {
      const Superoperator l = build_liouvillian({omega, 1.0, n});
      const Index d = n + 1;
      CVector id = vec(CMatrix::Identity(d, d));
      const CVector left = l.matrix().adjoint() * id;
      CHECK(left.cwiseAbs().maxCoeff() <= 1e-10);
      for (int trial = 0; trial < 20; ++trial) {
        const CMatrix h = random_hermitian(d, rng);
        const CMatrix out = l.apply(h);
        CHECK((out - out.adjoint()).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, h.norm()));
      }
    }
  }
}

TEST_CASE("superoperator matches the product-form oracle", "[liouvillian]") {
  for (int n : {1, 3, 8}) {
    for (double omega : {0.0, 1.0, 1.7}) {
      const CMatrix l = CMatrix(build_liouvillian({omega, 1.3, n}).matrix());
      CHECK((l - oracle::dense_superoperator(n, omega, 1.3)).cwiseAbs().maxCoeff() < 1e-13);
    }
  }
  // single spin at omega = kappa, written out by hand: H = (1/2) sigma_x, jump sqrt(2) sigma_-
  // rho = [[a, b], [c, d]] with index 0 = up; vec = (a, c, b, d).
  const Complex i(0, 1);
  CMatrix hand(4, 4);
  hand << -2.0, -0.5 * i, 0.5 * i, 0.0,
          -0.5 * i, -1.0, 0.0, 0.5 * i,
          0.5 * i, 0.0, -1.0, -0.5 * i,
          2.0, 0.5 * i, -0.5 * i, 0.0;
  const CMatrix l1 = CMatrix(build_liouvillian({1.0, 1.0, 1}).matrix());
  CHECK((l1 - hand).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("dark state at omega = 0", "[liouvillian]") {
  for (int n : {1, 4, 11}) {
    const auto b = build_basis(n);
    const Superoperator l = build_liouvillian({0.0, 1.0, n});
    const DensityMatrix dark = DensityMatrix::dicke_state(b, b.dim() - 1);
    CHECK(l.apply(dark.matrix()).cwiseAbs().maxCoeff() == 0.0);
    const DensityMatrix ss = steady_state(l);
    CHECK((ss.matrix() - dark.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("steady state residual and dense cross-check", "[liouvillian]") {
  for (int n : {1, 2, 6, 10}) {
    for (double omega : {0.3, 0.9, 1.5}) {
      const Superoperator l = build_liouvillian({omega, 1.0, n});
      SteadyStateDiagnostics diag;
      const DensityMatrix ss = steady_state(l, &diag);
      CHECK(diag.residual <= 1e-9);
      CHECK(std::abs(ss.matrix().trace() - 1.0) < 1e-12);
      CHECK((ss.matrix() - dense_steady_state(l).matrix()).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((ss.matrix() - oracle::dense_steady_state(n, omega, 1.0)).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(null_space_dimension(l) == 1);
    }
  }
}

TEST_CASE("steady-state solver reuses the symbolic analysis per size", "[liouvillian]") {
  SteadyStateSolver solver;
  SteadyStateDiagnostics d1, d2, d3;
  solver.solve(build_liouvillian({0.5, 1.0, 12}), &d1);
  solver.solve(build_liouvillian({0.7, 1.0, 12}), &d2);
  solver.solve(build_liouvillian({0.7, 1.0, 13}), &d3);
  CHECK_FALSE(d1.reused_analysis);
  CHECK(d2.reused_analysis);
  CHECK_FALSE(d3.reused_analysis);
}

TEST_CASE("magnetization trends with N", "[liouvillian]") {
  std::vector<double> static_phase, oscillating;
  for (int n : {10, 20, 40, 80}) {
    const auto b = build_basis(n);
    const Operator sz = spin_operator(b, SpinAxis::z);
    static_phase.push_back(std::abs(expectation(steady_state(build_liouvillian({0.5, 1.0, n})), sz)) / n);
    oscillating.push_back(std::abs(expectation(steady_state(build_liouvillian({1.5, 1.0, n})), sz)) / n);
  }
  for (std::size_t i = 1; i < oscillating.size(); ++i) CHECK(oscillating[i] < oscillating[i - 1]);
  // static phase settles near a nonzero value: changes shrink and the value stays large
  CHECK(std::abs(static_phase[3] - static_phase[2]) < std::abs(static_phase[1] - static_phase[0]));
  CHECK(static_phase.back() > 0.4);
}

TEST_CASE("parity map relates omega and -omega", "[liouvillian]") {
  for (int n : {3, 8}) {
    const DensityMatrix ss = steady_state(build_liouvillian({0.8, 1.0, n}));
    const CMatrix mirrored = parity_conjugate(ss).matrix();
    CHECK(oracle::lindblad_rhs(n, -0.8, 1.0, mirrored).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("steady state is the long-time limit from several initial states", "[liouvillian][evolution]") {
  for (int n : {4, 8}) {
    for (double omega : {0.5, 1.5}) {
      const Superoperator l = build_liouvillian({omega, 1.0, n});
      const auto b = l.basis();
      const DensityMatrix ss = steady_state(l);
      const double t_end = 25.0 * dominant_decay_rate(l).tau;
      const std::vector<double> times{t_end};
      for (const DensityMatrix& rho0 : {DensityMatrix::dicke_state(b, 0),
                                        DensityMatrix::dicke_state(b, b.dim() - 1),
                                        DensityMatrix::maximally_mixed(b)}) {
        const Trajectory tr = evolve(l, rho0, times);
        CHECK((tr.states.back().matrix() - ss.matrix()).norm() <= 1e-6);
      }
    }
  }
}

TEST_CASE("vectorization round trip", "[liouvillian]") {
  std::mt19937 rng(3);
  const CMatrix a = random_hermitian(5, rng);
  CHECK((unvec(vec(a), 5) - a).norm() == 0.0);
  const DensityMatrix rho = random_state(build_basis(4), rng);
  CHECK(rho.eigenvalues().minCoeff() > -1e-12);
}
