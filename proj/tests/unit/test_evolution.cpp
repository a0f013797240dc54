#include "btc/evolution.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include <vector>

using namespace btc;

TEST_CASE("evolution at t = 0 returns the initial state", "[evolution]") {
  const Superoperator l = build_liouvillian({0.7, 1.0, 6});
  const DensityMatrix rho0 = DensityMatrix::dicke_state(l.basis(), 6);
  const std::vector<double> t{0.0, 1.0};
  const Trajectory tr = evolve(l, rho0, t);
  REQUIRE(tr.states.size() == 2);
  CHECK((tr.states[0].matrix() - rho0.matrix()).norm() == 0.0);
  CHECK(tr.sz_per_n[0] == Catch::Approx(-0.5));
}

TEST_CASE("evolution matches the dense matrix exponential", "[evolution]") {
  for (int n : {1, 3, 8}) {
    for (double omega : {0.3, 1.4}) {
      const Superoperator l = build_liouvillian({omega, 1.0, n});
      const DensityMatrix rho0 = DensityMatrix::dicke_state(l.basis(), n);
      const std::vector<double> times{0.5, 2.0, 7.5};
      EvolveOptions opts;
      opts.tolerance = 1e-11;
      const Trajectory tr = evolve(l, rho0, times, opts);
      const CMatrix dense = oracle::dense_superoperator(n, omega, 1.0);
      for (std::size_t k = 0; k < times.size(); ++k) {
        const CMatrix prop = (dense * times[k]).exp();
        const CMatrix expected = unvec(prop * vec(rho0.matrix()), l.basis().dim());
        CHECK((tr.states[k].matrix() - expected).cwiseAbs().maxCoeff() < 1e-7);
      }
    }
  }
}

TEST_CASE("evolution preserves trace, Hermiticity and positivity", "[evolution]") {
  const Superoperator l = build_liouvillian({1.5, 1.0, 20});
  const DensityMatrix rho0 = DensityMatrix::maximally_mixed(l.basis());
  std::vector<double> times;
  for (int k = 1; k <= 40; ++k) times.push_back(0.5 * k);
  const Trajectory tr = evolve(l, rho0, times);
  for (const DensityMatrix& rho : tr.states) {
    CHECK(std::abs(rho.matrix().trace() - Complex(1.0)) < 1e-8);
    CHECK((rho.matrix() - rho.matrix().adjoint()).norm() < 1e-8);
    CHECK(rho.eigenvalues().minCoeff() > -1e-8);
  }
}

TEST_CASE("family integration equals separate integration", "[evolution]") {
  std::vector<Superoperator> ls{build_liouvillian({0.8, 1.0, 5}), build_liouvillian({0.9, 1.0, 5})};
  std::vector<DensityMatrix> init(2, DensityMatrix::dicke_state(ls[0].basis(), 5));
  const std::vector<double> times{1.0, 3.0};
  const auto fam = evolve_family(ls, init, times);
  REQUIRE(fam.size() == 2);
  for (std::size_t m = 0; m < 2; ++m) {
    const Trajectory single = evolve(ls[m], init[m], times);
    for (std::size_t k = 0; k < times.size(); ++k) {
      CHECK((fam[m].states[k].matrix() - single.states[k].matrix()).norm() < 1e-7);
    }
  }
}

TEST_CASE("evolution rejects bad time grids", "[evolution]") {
  const Superoperator l = build_liouvillian({0.5, 1.0, 2});
  const DensityMatrix rho0 = DensityMatrix::maximally_mixed(l.basis());
  const std::vector<double> negative{-1.0, 1.0};
  const std::vector<double> unsorted{2.0, 1.0};
  const std::vector<double> repeated{1.0, 1.0};
  CHECK_THROWS_AS(evolve(l, rho0, negative), std::invalid_argument);
  CHECK_THROWS_AS(evolve(l, rho0, unsorted), std::invalid_argument);
  CHECK_THROWS_AS(evolve(l, rho0, repeated), std::invalid_argument);
  const DensityMatrix other = DensityMatrix::maximally_mixed(build_basis(3));
  const std::vector<double> ok{1.0};
  CHECK_THROWS_AS(evolve(l, other, ok), std::invalid_argument);
}

TEST_CASE("keep_states = false still records magnetization", "[evolution]") {
  const Superoperator l = build_liouvillian({0.5, 1.0, 4});
  EvolveOptions opts;
  opts.keep_states = false;
  const std::vector<double> times{1.0, 2.0, 3.0};
  const Trajectory tr = evolve(l, DensityMatrix::maximally_mixed(l.basis()), times, opts);
  CHECK(tr.states.empty());
  CHECK(tr.sz_per_n.size() == 3);
}
