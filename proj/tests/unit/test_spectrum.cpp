#include "btc/krylov_schur.hpp"
#include "btc/spectrum.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

using namespace btc;
using Catch::Approx;

TEST_CASE("spectrum invariants", "[spectrum]") {
  for (int n : {2, 6, 12}) {
    for (double omega : {0.0, 0.5, 1.5}) {
      const Superoperator l = build_liouvillian({omega, 1.0, n});
      const LiouvillianSpectrum s = spectrum(l, static_cast<std::size_t>(l.size()));
      CHECK(s.method == "dense");
      CHECK(std::abs(s.eigenvalues.front()) <= 1e-9);
      const auto zeros = std::count_if(s.eigenvalues.begin(), s.eigenvalues.end(),
                                       [](Complex e) { return std::abs(e) <= 1e-9; });
      CHECK(zeros == 1);
      for (std::size_t j = 0; j < s.eigenvalues.size(); ++j) {
        const Complex e = s.eigenvalues[j];
        CHECK(e.real() <= 1e-9);
        if (j > 0) CHECK(e.real() <= s.eigenvalues[j - 1].real());
        if (std::abs(e.imag()) > 1e-8) {
          const bool paired = std::any_of(s.eigenvalues.begin(), s.eigenvalues.end(), [&](Complex f) {
            return std::abs(f - std::conj(e)) <= 1e-8;
          });
          CHECK(paired);
        }
      }
    }
  }
}

TEST_CASE("spectrum argument validation", "[spectrum]") {
  const Superoperator l = build_liouvillian({0.5, 1.0, 3});
  CHECK_THROWS_AS(spectrum(l, 0), std::invalid_argument);
  CHECK_THROWS_AS(spectrum(l, 17), std::invalid_argument);
  CHECK_NOTHROW(spectrum(l, 16));
}

TEST_CASE("single spin matches the analytic two-level spectrum", "[spectrum]") {
  // decay rate gamma = 2 kappa, Rabi frequency omega:
  // {0, -gamma/2, -3 gamma/4 +/- sqrt(gamma^2/16 - omega^2)}
  for (double omega : {0.2, 1.0, 2.5}) {
    const LiouvillianSpectrum s = spectrum(build_liouvillian({omega, 1.0, 1}), 4);
    const Complex root = std::sqrt(Complex(0.25 - omega * omega));
    std::vector<Complex> expected{0.0, -1.0, -1.5 + root, -1.5 - root};
    for (const Complex& e : expected) {
      const bool found = std::any_of(s.eigenvalues.begin(), s.eigenvalues.end(),
                                     [&](Complex f) { return std::abs(f - e) < 1e-12; });
      CHECK(found);
    }
  }
}

TEST_CASE("decay rate at omega = 0 is kappa for every N", "[spectrum]") {
  // slowest mode: coherence between m = -S and m = -S + 1, rate (kappa/S)(2S)/2
  for (int n : {1, 2, 7, 15}) {
    const DecayRate d = dominant_decay_rate(build_liouvillian({0.0, 1.0, n}));
    CHECK(d.rate == Approx(1.0).epsilon(1e-10));
    CHECK(d.tau == Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("shift-invert agrees with the dense path", "[spectrum]") {
  for (double omega : {0.5, 0.9, 1.5}) {
    const Superoperator l = build_liouvillian({omega, 1.0, 14});
    const LiouvillianSpectrum dense = spectrum(l, 6);
    SpectrumOptions opts;
    opts.dense_limit = 0;
    opts.extra_per_shift = 60;
    const LiouvillianSpectrum krylov = spectrum(l, 6, opts);
    CHECK(krylov.method == "shift-invert");
    REQUIRE(krylov.eigenvalues.size() == 6);
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(std::abs(dense.eigenvalues[j] - krylov.eigenvalues[j]) < 1e-8);
    }
    CHECK(krylov.max_residual < 1e-8);
    CHECK(dominant_decay_rate(l).rate == Approx(dominant_decay_rate(l, opts).rate).epsilon(1e-9));
  }
}

TEST_CASE("static phase slow modes are real and non-positive", "[spectrum]") {
  const LiouvillianSpectrum s = spectrum(build_liouvillian({0.5, 1.0, 30}), 9);
  for (const Complex& e : s.eigenvalues) {
    CHECK(std::abs(e.imag()) <= 1e-8);
    CHECK(e.real() <= 1e-10);
  }
}

TEST_CASE("oscillating phase shows equally spaced bands", "[spectrum]") {
  const std::vector<Complex> b = oscillation_bands(build_liouvillian({1.5, 1.0, 30}), 3);
  REQUIRE(b.size() == 3);
  CHECK(std::abs(b[0]) < 1e-9);
  const double d1 = b[1].imag() - b[0].imag();
  const double d2 = b[2].imag() - b[1].imag();
  CHECK(std::abs(d1 - d2) / d1 < 0.1);
  CHECK_THROWS_AS(oscillation_bands(build_liouvillian({0.0, 1.0, 5}), 2), SolverError);
}

TEST_CASE("eigenvalues_near orders by distance to the shift", "[spectrum]") {
  const Superoperator l = build_liouvillian({1.5, 1.0, 10});
  const auto near = eigenvalues_near(l, Complex(0.0, 1.1), 5);
  for (std::size_t j = 1; j < near.size(); ++j) {
    CHECK(std::abs(near[j] - Complex(0, 1.1)) >= std::abs(near[j - 1] - Complex(0, 1.1)));
  }
}

TEST_CASE("Krylov-Schur on a diagonal operator", "[krylov]") {
  const Index n = 200;
  RVector diag(n);
  for (Index i = 0; i < n; ++i) diag(i) = 1.0 / (1.0 + i);
  const LinearMap op = [&](const CVector& in, CVector& out) { out = diag.cast<Complex>().cwiseProduct(in); };
  KrylovSchurOptions opts;
  opts.nev = 5;
  const KrylovSchurResult r = krylov_schur(op, n, opts);
  REQUIRE(r.values.size() >= 5);
  for (Index i = 0; i < 5; ++i) CHECK(std::abs(r.values[i] - diag(i)) < 1e-10);
}
