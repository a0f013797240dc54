#include "btc/dicke.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace btc {

CollectiveSpinBasis::CollectiveSpinBasis(int n_spins) : n_spins_(n_spins) {
  if (n_spins < 1) {
    throw std::invalid_argument("CollectiveSpinBasis: n_spins must be >= 1, got " +
                                std::to_string(n_spins));
  }
}

std::vector<double> CollectiveSpinBasis::m_values() const {
  std::vector<double> out(static_cast<std::size_t>(dim()));
  for (Index i = 0; i < dim(); ++i) out[static_cast<std::size_t>(i)] = m(i);
  return out;
}

CollectiveSpinBasis build_basis(int n_spins) { return CollectiveSpinBasis(n_spins); }

Operator::Operator(CollectiveSpinBasis basis, CMatrix matrix)
    : basis_(basis), matrix_(std::move(matrix)) {
  if (matrix_.rows() != basis_.dim() || matrix_.cols() != basis_.dim()) {
    throw std::invalid_argument("Operator: matrix shape does not match basis dimension");
  }
}

bool Operator::is_hermitian(double tol) const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

SpinAxis parse_spin_axis(std::string_view label) {
  if (label == "x") return SpinAxis::x;
  if (label == "y") return SpinAxis::y;
  if (label == "z") return SpinAxis::z;
  if (label == "plus" || label == "+") return SpinAxis::plus;
  if (label == "minus" || label == "-") return SpinAxis::minus;
  throw std::invalid_argument("unknown spin axis label '" + std::string(label) + "'");
}

namespace {

// S+ |S,m> = sqrt(S(S+1) - m(m+1)) |S,m+1>; m+1 sits one index lower.
CMatrix raising(const CollectiveSpinBasis& basis) {
  const double s = basis.total_spin();
  CMatrix out = CMatrix::Zero(basis.dim(), basis.dim());
  for (Index i = 1; i < basis.dim(); ++i) {
    const double m = basis.m(i);
    out(i - 1, i) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
  }
  return out;
}

}  // namespace

Operator spin_operator(const CollectiveSpinBasis& basis, SpinAxis axis) {
  const Complex i_unit(0.0, 1.0);
  switch (axis) {
    case SpinAxis::plus:
      return Operator(basis, raising(basis));
    case SpinAxis::minus:
      return Operator(basis, raising(basis).adjoint());
    case SpinAxis::x: {
      const CMatrix up = raising(basis);
      return Operator(basis, 0.5 * (up + up.adjoint()));
    }
    case SpinAxis::y: {
      const CMatrix up = raising(basis);
      return Operator(basis, (up - up.adjoint()) / (2.0 * i_unit));
    }
    case SpinAxis::z: {
      CMatrix z = CMatrix::Zero(basis.dim(), basis.dim());
      for (Index i = 0; i < basis.dim(); ++i) z(i, i) = basis.m(i);
      return Operator(basis, std::move(z));
    }
  }
  throw std::invalid_argument("spin_operator: invalid axis");
}

Operator spin_operator(const CollectiveSpinBasis& basis, std::string_view axis) {
  return spin_operator(basis, parse_spin_axis(axis));
}

Operator spin_projection(const CollectiveSpinBasis& basis, double theta, double phi) {
  if (!std::isfinite(theta) || !std::isfinite(phi)) {
    throw std::invalid_argument("spin_projection: angles must be finite");
  }
  const double nx = std::sin(theta) * std::cos(phi);
  const double ny = std::sin(theta) * std::sin(phi);
  const double nz = std::cos(theta);
  CMatrix m = nz * spin_operator(basis, SpinAxis::z).matrix();
  if (nx != 0.0) m += nx * spin_operator(basis, SpinAxis::x).matrix();
  if (ny != 0.0) m += ny * spin_operator(basis, SpinAxis::y).matrix();
  return Operator(basis, std::move(m));
}

ProjectionEigenbasis projection_eigenbasis(const CollectiveSpinBasis& basis, double theta,
                                           double phi) {
  const Operator sn = spin_projection(basis, theta, phi);
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sn.matrix());
  if (solver.info() != Eigen::Success) {
    throw SolverError("projection_eigenbasis: eigendecomposition failed");
  }

  ProjectionEigenbasis out;
  out.vectors = solver.eigenvectors();
  const Index dim = basis.dim();
  out.labels.resize(static_cast<std::size_t>(dim));
  for (Index j = 0; j < dim; ++j) {
    const double expected = -basis.total_spin() + static_cast<double>(j);
    const double value = solver.eigenvalues()(j);
    if (std::abs(value - expected) > 1e-8) {
      throw SolverError("projection_eigenbasis: eigenvalue " + std::to_string(value) +
                        " is off the spin ladder (expected " + std::to_string(expected) + ")");
    }
    out.labels[static_cast<std::size_t>(j)] = expected;

    // Phase convention: the first component within 1e-9 of the largest magnitude is real positive.
    auto col = out.vectors.col(j);
    const double biggest = col.cwiseAbs().maxCoeff();
    Index arg = 0;
    while (std::abs(col(arg)) < biggest * (1.0 - 1e-9)) ++arg;
    const Complex pivot = col(arg);
    col *= std::conj(pivot) / std::abs(pivot);
    col(arg) = std::abs(pivot);
  }

  const double defect =
      (out.vectors.adjoint() * out.vectors - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff();
  if (defect > 1e-10) {
    throw SolverError("projection_eigenbasis: eigenvectors not orthonormal (defect " +
                      std::to_string(defect) + ")");
  }
  return out;
}

RMatrix rotation_about_y(const CollectiveSpinBasis& basis, double theta) {
  // Sy is Hermitian with the non-degenerate spectrum -S..S; exponentiate in its eigenbasis.
  const CMatrix sy = spin_operator(basis, SpinAxis::y).matrix();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sy);
  const RVector& ev = solver.eigenvalues();
  CVector phases(ev.size());
  for (Index i = 0; i < ev.size(); ++i) phases(i) = std::polar(1.0, -theta * ev(i));
  const CMatrix& v = solver.eigenvectors();
  const CMatrix rot = v * phases.asDiagonal() * v.adjoint();
  return rot.real();
}

RVector parity_signs(const CollectiveSpinBasis& basis) {
  RVector z(basis.dim());
  for (Index i = 0; i < basis.dim(); ++i) z(i) = (i % 2 == 0) ? 1.0 : -1.0;
  return z;
}

}  // namespace btc
