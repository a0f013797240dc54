// liouvillian.hpp: vectorized master equation for collective driving plus collective decay.
//
//   d rho/dt = -i omega [Sx, rho] + (kappa/S) (S- rho S+ - 1/2 {S+ S-, rho})
//
// Vectorization is column stacking: vec(A rho B) = (B^T kron A) vec(rho).

#pragma once

#include "btc/dicke.hpp"
#include "btc/types.hpp"

#include <Eigen/SparseLU>

#include <optional>

namespace btc {

struct ModelParams {
  double omega = 0.0;  // in units of kappa when kappa == 1
  double kappa = 1.0;
  int n_spins = 1;

  // Throws std::invalid_argument on kappa <= 0, n_spins < 1, omega < 0 or non-finite values.
  void validate() const;
};

struct DensityTolerances {
  double hermiticity = 1e-10;
  double trace = 1e-10;
  double min_eigenvalue = -1e-8;
};

class DensityMatrix {
 public:
  // Validates Hermiticity, unit trace and positivity; throws InvariantError.
  DensityMatrix(CollectiveSpinBasis basis, CMatrix matrix, const DensityTolerances& tol = {});

  static DensityMatrix dicke_state(const CollectiveSpinBasis& basis, Index index);
  static DensityMatrix maximally_mixed(const CollectiveSpinBasis& basis);
  static DensityMatrix pure(const CollectiveSpinBasis& basis, const CVector& psi);

  const CollectiveSpinBasis& basis() const noexcept { return basis_; }
  const CMatrix& matrix() const noexcept { return matrix_; }
  Index dim() const noexcept { return basis_.dim(); }

  RVector eigenvalues() const;

 private:
  CollectiveSpinBasis basis_;
  CMatrix matrix_;
};

// Tr(rho op). Throws InvariantError when the imaginary residue exceeds 1e-10 (scaled by |op|).
double expectation(const DensityMatrix& rho, const Operator& op);

class Superoperator {
 public:
  Superoperator(ModelParams params, SparseCMatrix matrix);

  const ModelParams& params() const noexcept { return params_; }
  const CollectiveSpinBasis& basis() const noexcept { return basis_; }
  const SparseCMatrix& matrix() const noexcept { return matrix_; }
  Index size() const noexcept { return matrix_.rows(); }

  CMatrix apply(const CMatrix& rho) const;
  double frobenius_norm() const;

 private:
  ModelParams params_;
  CollectiveSpinBasis basis_;
  SparseCMatrix matrix_;
};

Superoperator build_liouvillian(const ModelParams& params);

// d L / d omega = -i (I kron Sx - Sx^T kron I); independent of omega.
SparseCMatrix liouvillian_omega_derivative(const CollectiveSpinBasis& basis);

// Sparse Kronecker product (B kron A).
SparseCMatrix kron(const SparseCMatrix& b, const SparseCMatrix& a);

inline CVector vec(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}
inline CMatrix unvec(const CVector& v, Index dim) {
  return Eigen::Map<const CMatrix>(v.data(), dim, dim);
}

struct SteadyStateDiagnostics {
  double residual = 0.0;            // |L rho|_F / (|L|_F |rho|_F)
  double hermiticity_defect = 0.0;  // before symmetrization
  double min_eigenvalue = 0.0;
  bool reused_analysis = false;
};

struct SteadyStateOptions {
  double residual_tolerance = 1e-9;
  double hermiticity_tolerance = 1e-8;
};

/// Null vector of L normalized by trace. The row of L belonging to rho_00 is
/// replaced by the trace functional and the resulting sparse system is
/// factorized with SparseLU; the symbolic analysis is reused while the
/// sparsity pattern stays the same (same N). Not thread-safe: use one solver
/// per worker.
class SteadyStateSolver {
 public:
  explicit SteadyStateSolver(SteadyStateOptions options = {}) : options_(options) {}

  DensityMatrix solve(const Superoperator& superop, SteadyStateDiagnostics* diag = nullptr);

 private:
  SteadyStateOptions options_;
  Eigen::SparseLU<SparseCMatrix, Eigen::COLAMDOrdering<int>> lu_;
  std::optional<std::pair<Index, Index>> pattern_;  // (size, nnz) of the analyzed matrix
};

DensityMatrix steady_state(const Superoperator& superop, SteadyStateDiagnostics* diag = nullptr);

// Dense cross-check for small N: SVD null space of L. Throws SolverError when the
// null space dimension at relative tolerance `tol` is not one.
DensityMatrix dense_steady_state(const Superoperator& superop, double tol = 1e-10);
Index null_space_dimension(const Superoperator& superop, double tol = 1e-10);

// rho -> Z rho Z with Z = diag((-1)^i). Maps steady states at omega onto those at -omega.
DensityMatrix parity_conjugate(const DensityMatrix& rho);

}  // namespace btc
