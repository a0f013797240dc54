#include "btc/dicke.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace btc;
using Catch::Approx;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

CMatrix op(const CollectiveSpinBasis& b, SpinAxis a) { return spin_operator(b, a).matrix(); }

}  // namespace

TEST_CASE("basis construction", "[dicke]") {
  const auto b1 = build_basis(1);
  CHECK(b1.dim() == 2);
  CHECK(b1.m_values() == std::vector<double>{0.5, -0.5});
  const auto b2 = build_basis(2);
  CHECK(b2.dim() == 3);
  CHECK(b2.m_values() == std::vector<double>{1.0, 0.0, -1.0});
  CHECK_THROWS_AS(build_basis(0), std::invalid_argument);
  CHECK_THROWS_AS(build_basis(-3), std::invalid_argument);
  for (int n = 1; n <= 30; ++n) {
    const auto m = build_basis(n).m_values();
    for (std::size_t i = 1; i < m.size(); ++i) CHECK(m[i - 1] - m[i] == 1.0);
    CHECK(m.front() == 0.5 * n);
  }
}

TEST_CASE("single spin and ladder examples", "[dicke]") {
  const auto b1 = build_basis(1);
  CMatrix z(2, 2), x(2, 2);
  z << 0.5, 0, 0, -0.5;
  x << 0, 0.5, 0.5, 0;
  CHECK(max_abs(op(b1, SpinAxis::z) - z) == 0.0);
  CHECK(max_abs(op(b1, SpinAxis::x) - x) == 0.0);

  const auto b2 = build_basis(2);
  Eigen::VectorXcd ket0 = Eigen::VectorXcd::Unit(3, 1);  // |1, 0>
  const Eigen::VectorXcd up = op(b2, SpinAxis::plus) * ket0;
  CHECK(std::abs(up(0) - std::sqrt(2.0)) < 1e-15);
  CHECK(up.tail(2).norm() == 0.0);

  CHECK_THROWS_AS(spin_operator(b2, "w"), std::invalid_argument);
  CHECK(parse_spin_axis("+") == SpinAxis::plus);
  CHECK(parse_spin_axis("minus") == SpinAxis::minus);
}

TEST_CASE("ladder operators match the independent construction", "[dicke]") {
  for (int n = 1; n <= 20; ++n) {
    const auto b = build_basis(n);
    CHECK(max_abs(op(b, SpinAxis::plus) - oracle::ladder_plus(n)) < 1e-14);
    CHECK(max_abs(op(b, SpinAxis::x) - oracle::spin_x(n)) < 1e-14);
  }
}

TEST_CASE("commutator and Casimir identities", "[dicke][property]") {
  for (int n = 1; n <= 50; ++n) {
    const auto b = build_basis(n);
    const CMatrix sx = op(b, SpinAxis::x), sy = op(b, SpinAxis::y), sz = op(b, SpinAxis::z);
    const CMatrix sp = op(b, SpinAxis::plus), sm = op(b, SpinAxis::minus);
    const double tol = 1e-12 * max_abs(sz);
    const Complex i(0, 1);
    CHECK(max_abs(sp * sm - sm * sp - 2.0 * sz) <= tol);
    CHECK(max_abs(sz * sp - sp * sz - sp) <= tol);
    CHECK(max_abs(sz * sm - sm * sz + sm) <= tol);
    CHECK(max_abs(sx * sy - sy * sx - i * sz) <= tol);
    CHECK(max_abs(sp.adjoint() - sm) == 0.0);
    CHECK(spin_operator(b, SpinAxis::x).is_hermitian());
    CHECK(spin_operator(b, SpinAxis::y).is_hermitian());
    const double s = b.total_spin();
    const CMatrix casimir = sx * sx + sy * sy + sz * sz;
    CHECK(max_abs(casimir - s * (s + 1) * CMatrix::Identity(b.dim(), b.dim())) < 1e-10);
  }
}

TEST_CASE("spin projection special directions", "[dicke]") {
  const auto b = build_basis(7);
  const double pi = std::numbers::pi;
  CHECK(max_abs(spin_projection(b, 0.0, 1.3).matrix() - op(b, SpinAxis::z)) == 0.0);
  CHECK(max_abs(spin_projection(b, pi / 2, 0.0).matrix() - op(b, SpinAxis::x)) < 1e-15);
  CHECK(max_abs(spin_projection(b, pi / 2, pi / 2).matrix() - op(b, SpinAxis::y)) < 1e-15);
  CHECK_THROWS(spin_projection(b, std::nan(""), 0.0));
}

TEST_CASE("projection eigenbasis", "[dicke][property]") {
  const double pi = std::numbers::pi;
  for (int n : {1, 2, 5, 12, 31}) {
    const auto b = build_basis(n);
    const double s = b.total_spin();

    const auto e0 = projection_eigenbasis(b, 0.0, 0.0);
    for (Index j = 0; j < b.dim(); ++j) {
      CHECK(e0.labels[j] == Approx(-s + j).margin(1e-12));
      // ascending labels: label -S is basis index dim-1
      CHECK(std::abs(e0.vectors(b.dim() - 1 - j, j) - 1.0) < 1e-12);
    }
    const auto epi = projection_eigenbasis(b, pi, 0.0);
    for (Index j = 0; j < b.dim(); ++j) CHECK(std::abs(epi.vectors(j, j) - 1.0) < 1e-10);

    for (const auto [theta, phi] : {std::pair{0.4, 2.1}, {1.9, 0.3}, {pi / 2, pi / 2}}) {
      const auto e = projection_eigenbasis(b, theta, phi);
      const CMatrix sn = spin_projection(b, theta, phi).matrix();
      CHECK(max_abs(e.vectors.adjoint() * e.vectors - CMatrix::Identity(b.dim(), b.dim())) < 1e-10);
      for (Index j = 0; j < b.dim(); ++j) {
        CHECK(e.labels[j] == Approx(-s + j).margin(1e-8));
        CHECK((sn * e.vectors.col(j) - e.labels[j] * e.vectors.col(j)).norm() < 1e-10);
        const double biggest = e.vectors.col(j).cwiseAbs().maxCoeff();
        Index big = 0;
        while (std::abs(e.vectors(big, j)) < biggest * (1.0 - 1e-9)) ++big;
        CHECK(e.vectors(big, j).imag() == 0.0);
        CHECK(e.vectors(big, j).real() > 0.0);
      }
    }
  }
}

TEST_CASE("rotation about y is real orthogonal and rotates Sz", "[dicke]") {
  for (int n : {1, 4, 9}) {
    const auto b = build_basis(n);
    for (double theta : {0.0, 0.7, 2.4}) {
      const RMatrix r = rotation_about_y(b, theta);
      CHECK((r.transpose() * r - RMatrix::Identity(b.dim(), b.dim())).cwiseAbs().maxCoeff() < 1e-12);
      const CMatrix rc = r.cast<Complex>();
      const CMatrix rotated = rc * op(b, SpinAxis::z) * rc.adjoint();
      CHECK(max_abs(rotated - spin_projection(b, theta, 0.0).matrix()) < 1e-12);
    }
  }
}

TEST_CASE("parity signs", "[dicke]") {
  const RVector z = parity_signs(build_basis(3));
  CHECK(z(0) == 1.0);
  CHECK(z(1) == -1.0);
  CHECK(z(2) == 1.0);
  CHECK(z(3) == -1.0);
}
