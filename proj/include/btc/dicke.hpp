// dicke.hpp: collective spin operators on the symmetric (Dicke) sector of N spin-1/2.
//
// Basis ordering: index 0 is m = +S, index dim-1 is m = -S.

#pragma once

#include "btc/types.hpp"

#include <string_view>
#include <vector>

namespace btc {

class CollectiveSpinBasis {
 public:
  explicit CollectiveSpinBasis(int n_spins);

  int n_spins() const noexcept { return n_spins_; }
  double total_spin() const noexcept { return 0.5 * n_spins_; }
  Index dim() const noexcept { return n_spins_ + 1; }

  // Magnetic quantum number of basis index i.
  double m(Index i) const noexcept { return total_spin() - static_cast<double>(i); }
  std::vector<double> m_values() const;

  bool operator==(const CollectiveSpinBasis&) const = default;

 private:
  int n_spins_;
};

CollectiveSpinBasis build_basis(int n_spins);

class Operator {
 public:
  Operator(CollectiveSpinBasis basis, CMatrix matrix);

  const CollectiveSpinBasis& basis() const noexcept { return basis_; }
  const CMatrix& matrix() const noexcept { return matrix_; }

  bool is_hermitian(double tol = 1e-12) const;

 private:
  CollectiveSpinBasis basis_;
  CMatrix matrix_;
};

enum class SpinAxis { x, y, z, plus, minus };

// Accepts "x", "y", "z", "plus"/"+", "minus"/"-". Throws std::invalid_argument otherwise.
SpinAxis parse_spin_axis(std::string_view label);

Operator spin_operator(const CollectiveSpinBasis& basis, SpinAxis axis);
Operator spin_operator(const CollectiveSpinBasis& basis, std::string_view axis);

// S_n = sin(theta) cos(phi) Sx + sin(theta) sin(phi) Sy + cos(theta) Sz
Operator spin_projection(const CollectiveSpinBasis& basis, double theta, double phi);

struct ProjectionEigenbasis {
  std::vector<double> labels;  // ascending: -S, ..., +S
  CMatrix vectors;             // column j is the eigenvector for labels[j]
};

/// Orthonormal eigenvectors of S_n, ordered by ascending eigenvalue. Each
/// vector's largest-magnitude component is made real and positive.
/// Throws SolverError if the numerical eigenvectors are not orthonormal to
/// 1e-10 or the eigenvalues do not reproduce the ladder -S..S.
ProjectionEigenbasis projection_eigenbasis(const CollectiveSpinBasis& basis, double theta,
                                           double phi);

// exp(-i theta Sy); real orthogonal in this basis.
RMatrix rotation_about_y(const CollectiveSpinBasis& basis, double theta);

// exp(i pi Sz) up to a global phase: diag((-1)^i).
RVector parity_signs(const CollectiveSpinBasis& basis);

}  // namespace btc
