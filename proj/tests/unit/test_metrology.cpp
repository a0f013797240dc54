#include "btc/metrology.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace btc;
using Catch::Approx;

namespace {

DensityMatrix qubit(double a) {
  CVector psi(2);
  psi << std::cos(a), std::sin(a);
  return DensityMatrix::pure(build_basis(1), psi);
}

DensityMatrix diag_qubit(double p) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = p;
  m(1, 1) = 1.0 - p;
  return DensityMatrix(build_basis(1), m);
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

TEST_CASE("fidelity examples", "[metrology]") {
  CHECK(fidelity(qubit(0.3), qubit(0.3)) == Approx(1.0).margin(1e-12));
  CHECK(fidelity(qubit(0.0), qubit(std::numbers::pi / 2)) == Approx(0.0).margin(1e-12));
  CHECK(fidelity(qubit(0.0), qubit(0.4)) == Approx(std::cos(0.4)).epsilon(1e-12));
  const double p = 0.3, q = 0.8;
  CHECK(fidelity(diag_qubit(p), diag_qubit(q)) ==
        Approx(std::sqrt(p * q) + std::sqrt((1 - p) * (1 - q))).epsilon(1e-12));
  CHECK_THROWS_AS(fidelity(qubit(0.1), DensityMatrix::maximally_mixed(build_basis(2))),
                  std::invalid_argument);
}

TEST_CASE("fidelity properties on random states", "[metrology][property]") {
  std::mt19937 rng(17);
  for (int n : {1, 3, 8}) {
    const CollectiveSpinBasis b(n);
    for (int trial = 0; trial < 10; ++trial) {
      const DensityMatrix a = random_state(b, rng);
      const DensityMatrix c = random_state(b, rng);
      const double f = fidelity(a, c);
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
      CHECK(std::abs(f - fidelity(c, a)) < 1e-9);
      CHECK(fidelity(a, a) == Approx(1.0).margin(1e-9));
      // measurement cannot make states less similar
      for (double theta : {0.0, 0.9, 2.0}) {
        const auto pa = measurement_probabilities(a, {theta, 0.4});
        const auto pc = measurement_probabilities(c, {theta, 0.4});
        double bc = 0.0;
        for (std::size_t s = 0; s < pa.size(); ++s) bc += std::sqrt(pa[s] * pc[s]);
        CHECK(bc >= f - 1e-9);
      }
    }
  }
}

TEST_CASE("fidelity finite difference recovers a pure-state QFI", "[metrology]") {
  // |psi(x)> = cos(a x)|0> + sin(a x)|1> has F_Q = 4 a^2
  const double a = 1.7, x = 0.35, d = 1e-3;
  const double f = fidelity(qubit(a * (x - d)), qubit(a * (x + d)));
  CHECK(8.0 * (1.0 - f) / (4.0 * d * d) == Approx(4.0 * a * a).epsilon(1e-5));
}

TEST_CASE("steady-state QFI matches the SLD oracle", "[metrology]") {
  for (int n : {1, 4, 10}) {
    for (double omega : {0.3, 0.8, 1.2}) {
      const FisherResult r = qfi_fidelity({omega, 1.0, n});
      const CMatrix rho = oracle::dense_steady_state(n, omega, 1.0);
      const DensityMatrix state(build_basis(n), rho);
      const double expected =
          oracle::qfi_sld_oracle(state, oracle::steady_state_derivative(n, omega, 1.0, rho));
      CHECK(r.value == Approx(expected).epsilon(1e-4));
      CHECK(r.kind == FisherKind::quantum);
      CHECK(std::abs(r.fine_value - r.coarse_value) <= 0.01 * r.fine_value);
    }
  }
}

TEST_CASE("QFI refinement failure raises ConvergenceError", "[metrology]") {
  CHECK_THROWS_AS(qfi_fidelity({0.9, 1.0, 20}, 0.4), ConvergenceError);
  CHECK_THROWS_AS(qfi_fidelity({0.9, 1.0, 20}, 0.0), std::invalid_argument);
}

TEST_CASE("measurement probability examples", "[metrology]") {
  const CollectiveSpinBasis b(2);
  const DensityMatrix down = DensityMatrix::dicke_state(b, 2);
  // outcome index 0 is s = -S
  auto p = measurement_probabilities(down, {0.0, 0.0});
  CHECK(p[0] == Approx(1.0));
  CHECK(p[2] == Approx(0.0).margin(1e-14));
  p = measurement_probabilities(down, {std::numbers::pi, 0.0});
  CHECK(p[2] == Approx(1.0));
  // spin-1 |m=-1> measured along x: binomial (1/4, 1/2, 1/4)
  p = measurement_probabilities(down, {std::numbers::pi / 2, 0.0});
  CHECK(p[0] == Approx(0.25));
  CHECK(p[1] == Approx(0.5));
  CHECK(p[2] == Approx(0.25));
  CHECK_THROWS_AS(measurement_probabilities(down, {-0.1, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(measurement_probabilities(down, {0.1, 3.5}), std::invalid_argument);
}

TEST_CASE("projection series reproduces direct probabilities", "[metrology][property]") {
  std::mt19937 rng(5);
  for (int n : {1, 4, 9}) {
    const CollectiveSpinBasis b(n);
    const DensityMatrix rho = random_state(b, rng);
    for (double theta : {0.0, 0.7, 1.9, std::numbers::pi}) {
      const ProjectionSeries series(rho, rotation_about_y(b, theta));
      for (double phi : {0.0, 0.5, 2.2, std::numbers::pi}) {
        const RVector fast = series.probabilities(phi);
        const auto direct = measurement_probabilities(rho, {theta, phi});
        double total = 0.0;
        for (std::size_t s = 0; s < direct.size(); ++s) {
          CHECK(std::abs(fast(static_cast<Index>(s)) - direct[s]) < 1e-10);
          total += direct[s];
        }
        CHECK(total == Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("classical Fisher information never exceeds the QFI", "[metrology][property]") {
  for (double omega : {0.5, 0.9, 1.3}) {
    SteadyStateSolver solver;
    const DerivativeStencil st = steady_state_stencil({omega, 1.0, 10}, 1e-3, solver);
    const double fq = qfi_from_stencil(st).value;
    for (double theta : linspace(0.0, std::numbers::pi, 7)) {
      for (double phi : linspace(0.0, std::numbers::pi, 5)) {
        CHECK(cfi_from_stencil(st, {theta, phi}).fisher.value <= fq * (1.0 + 1e-3));
      }
    }
  }
}

TEST_CASE("z measurement at zero drive carries no information", "[metrology]") {
  // rho(-w) = Z rho(w) Z leaves the z populations even in w
  const ClassicalFisher c = cfi({0.0, 1.0, 8}, {0.0, 0.0});
  CHECK(c.fisher.value == Approx(0.0).margin(1e-9));
}

TEST_CASE("CFI landscape is symmetric under phi -> pi - phi", "[metrology][property]") {
  SteadyStateSolver solver;
  const DerivativeStencil st = steady_state_stencil({0.9, 1.0, 8}, 1e-3, solver);
  for (double theta : {0.6, 1.5, 2.4}) {
    for (double phi : {0.2, 1.0}) {
      const double a = cfi_from_stencil(st, {theta, phi}).fisher.value;
      const double b = cfi_from_stencil(st, {theta, std::numbers::pi - phi}).fisher.value;
      CHECK(a == Approx(b).epsilon(1e-6));
    }
  }
}

TEST_CASE("optimize_cfi dominates its grid", "[metrology]") {
  const auto thetas = linspace(0.0, std::numbers::pi, 25);
  const auto phis = linspace(0.0, std::numbers::pi, 13);
  SteadyStateSolver solver;
  const DerivativeStencil st = steady_state_stencil({0.9, 1.0, 12}, 1e-3, solver);
  const CfiOptimum best = optimize_cfi_from_stencil(st, thetas, phis);
  const double fq = qfi_from_stencil(st).value;
  CHECK(best.fisher.value >= best.grid_best * (1.0 - 1e-12));
  CHECK(best.fisher.value <= fq * (1.0 + 1e-3));
  CHECK(best.setting.phi == Approx(std::numbers::pi / 2).margin(0.05));
  for (std::size_t i = 0; i < thetas.size(); i += 6) {
    for (std::size_t j = 0; j < phis.size(); j += 3) {
      CHECK(best.grid_best >= cfi_from_stencil(st, {thetas[i], phis[j]}).fisher.value * (1 - 1e-9));
    }
  }
  // unsorted and duplicated grids give the same answer
  std::vector<double> shuffled(thetas.rbegin(), thetas.rend());
  shuffled.push_back(thetas[3]);
  const CfiOptimum again = optimize_cfi_from_stencil(st, shuffled, phis);
  CHECK(again.setting.theta == best.setting.theta);
  CHECK(again.fisher.value == best.fisher.value);
  CHECK_THROWS_AS(optimize_cfi_from_stencil(st, {}, phis), std::invalid_argument);
  CHECK_THROWS_AS(optimize_cfi_from_stencil(st, {4.0}, phis), std::invalid_argument);
}

TEST_CASE("optimize_cfi on a single grid point", "[metrology]") {
  SteadyStateSolver solver;
  const DerivativeStencil st = steady_state_stencil({0.9, 1.0, 4}, 1e-3, solver);
  const CfiOptimum one = optimize_cfi_from_stencil(st, {1.0}, {0.5});
  CHECK(one.setting.theta == 1.0);
  CHECK(one.setting.phi == 0.5);
  CHECK_FALSE(one.refined);
}

TEST_CASE("time bound and alpha constraint", "[metrology]") {
  CHECK(qfi_time_bound(4, 1.0) == 2.0);
  CHECK(qfi_time_bound(10, 2.0) == 2.5);
  CHECK_THROWS_AS(qfi_time_bound(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(qfi_time_bound(3, 0.0), std::invalid_argument);
  const AlphaConstraintReport r = verify_alpha_constraint(build_basis(4), 1.0);
  CHECK(r.satisfied);
  CHECK(r.alpha_norm == Approx(0.5).epsilon(1e-15));
  CHECK(r.gamma1 == Approx(-0.5 * std::sqrt(2.0)));
  for (int n = 1; n <= 30; ++n) {
    for (double kappa : {0.5, 1.0, 3.0}) {
      const AlphaConstraintReport q = verify_alpha_constraint(build_basis(n), kappa);
      CHECK(q.satisfied);
      CHECK(q.constraint_residual < 1e-12);
      CHECK(4.0 * q.alpha_norm == Approx(qfi_time_bound(n, kappa)).epsilon(1e-14));
    }
  }
}

TEST_CASE("trajectory QFI rate respects the bound", "[metrology]") {
  const ModelParams params{0.9, 1.0, 10};
  const DensityMatrix start = DensityMatrix::dicke_state(build_basis(10), 10);
  const std::vector<double> times{0.5, 2.0, 8.0, 32.0};
  const auto series = qfi_rate_series(params, start, times);
  REQUIRE(series.size() == times.size());
  for (const TrajectoryQfi& r : series) {
    CHECK(r.bound == 5.0);
    CHECK(r.bound_satisfied);
    CHECK(r.rate <= r.bound);
  }
  // once saturated the QFI stops growing, so the rate falls like 1/T
  const double fss = qfi_fidelity(params).value;
  CHECK(series.back().qfi.value == Approx(fss).epsilon(0.05));
  CHECK(series.back().rate < series[2].rate);
  const TrajectoryQfi single = qfi_rate_trajectory(params, start, 2.0);
  CHECK(single.qfi.value == Approx(series[1].qfi.value).epsilon(1e-6));
  CHECK_THROWS_AS(qfi_rate_trajectory(params, start, 0.0), std::invalid_argument);
}

TEST_CASE("optimize_cfi keeps the first of equal grid values", "[metrology]") {
  // z populations at zero drive do not depend on phi, so the row is flat
  SteadyStateSolver solver;
  const DerivativeStencil st = steady_state_stencil({0.0, 1.0, 6}, 1e-3, solver);
  const CfiOptimum best = optimize_cfi_from_stencil(st, {0.0}, {2.0, 0.3, 1.0});
  CHECK(best.setting.phi == 0.3);
  CHECK(best.setting.theta == 0.0);
}
