#include "btc/liouvillian.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace btc {

void ModelParams::validate() const {
  if (!std::isfinite(omega) || !std::isfinite(kappa)) {
    throw std::invalid_argument("ModelParams: omega and kappa must be finite");
  }
  if (kappa <= 0.0) throw std::invalid_argument("ModelParams: kappa must be > 0");
  if (omega < 0.0) throw std::invalid_argument("ModelParams: omega must be >= 0");
  if (n_spins < 1) throw std::invalid_argument("ModelParams: n_spins must be >= 1");
}

DensityMatrix::DensityMatrix(CollectiveSpinBasis basis, CMatrix matrix,
                             const DensityTolerances& tol)
    : basis_(basis), matrix_(std::move(matrix)) {
  if (matrix_.rows() != basis_.dim() || matrix_.cols() != basis_.dim()) {
    throw std::invalid_argument("DensityMatrix: shape does not match basis");
  }
  if (!matrix_.allFinite()) throw InvariantError("DensityMatrix: non-finite entries");
  const double herm = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol.hermiticity) {
    throw InvariantError("DensityMatrix: not Hermitian (defect " + std::to_string(herm) + ")");
  }
  const Complex tr = matrix_.trace();
  if (std::abs(tr - 1.0) > tol.trace) {
    throw InvariantError("DensityMatrix: trace " + std::to_string(tr.real()) + " != 1");
  }
  const double lmin = eigenvalues().minCoeff();
  if (lmin < tol.min_eigenvalue) {
    throw InvariantError("DensityMatrix: negative eigenvalue " + std::to_string(lmin));
  }
}

DensityMatrix DensityMatrix::dicke_state(const CollectiveSpinBasis& basis, Index index) {
  if (index < 0 || index >= basis.dim()) {
    throw std::out_of_range("dicke_state: index out of range");
  }
  CMatrix m = CMatrix::Zero(basis.dim(), basis.dim());
  m(index, index) = 1.0;
  return DensityMatrix(basis, std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(const CollectiveSpinBasis& basis) {
  const Index d = basis.dim();
  return DensityMatrix(basis, CMatrix::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix DensityMatrix::pure(const CollectiveSpinBasis& basis, const CVector& psi) {
  const CVector n = psi.normalized();
  return DensityMatrix(basis, n * n.adjoint());
}

RVector DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (matrix_ + matrix_.adjoint()),
                                                Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double expectation(const DensityMatrix& rho, const Operator& op) {
  if (!(rho.basis() == op.basis())) {
    throw std::invalid_argument("expectation: basis mismatch");
  }
  const Complex value = (rho.matrix() * op.matrix()).trace();
  const double scale = std::max(1.0, op.matrix().cwiseAbs().maxCoeff());
  if (std::abs(value.imag()) > 1e-10 * scale) {
    throw InvariantError("expectation: imaginary residue " + std::to_string(value.imag()) +
                         " (non-Hermitian input?)");
  }
  return value.real();
}

Superoperator::Superoperator(ModelParams params, SparseCMatrix matrix)
    : params_(params), basis_(params.n_spins), matrix_(std::move(matrix)) {
  const Index d = basis_.dim();
  if (matrix_.rows() != d * d || matrix_.cols() != d * d) {
    throw std::invalid_argument("Superoperator: matrix must be (N+1)^2 square");
  }
  matrix_.makeCompressed();
}

CMatrix Superoperator::apply(const CMatrix& rho) const {
  const CVector out = matrix_ * vec(rho);
  return unvec(out, basis_.dim());
}

double Superoperator::frobenius_norm() const { return matrix_.norm(); }

SparseCMatrix kron(const SparseCMatrix& b, const SparseCMatrix& a) {
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(static_cast<std::size_t>(b.nonZeros() * a.nonZeros()));
  for (Index kb = 0; kb < b.outerSize(); ++kb) {
    for (SparseCMatrix::InnerIterator ib(b, kb); ib; ++ib) {
      for (Index ka = 0; ka < a.outerSize(); ++ka) {
        for (SparseCMatrix::InnerIterator ia(a, ka); ia; ++ia) {
          triplets.emplace_back(ib.row() * a.rows() + ia.row(), ib.col() * a.cols() + ia.col(),
                                ib.value() * ia.value());
        }
      }
    }
  }
  SparseCMatrix out(b.rows() * a.rows(), b.cols() * a.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

namespace {

SparseCMatrix sparse_of(const CMatrix& m) { return m.sparseView(0.0, 0.0); }

SparseCMatrix identity(Index d) {
  SparseCMatrix id(d, d);
  id.setIdentity();
  return id;
}

// I kron Sx - Sx^T kron I : the commutator [Sx, .] in vectorized form.
SparseCMatrix sx_commutator(const CollectiveSpinBasis& basis) {
  const SparseCMatrix sx = sparse_of(spin_operator(basis, SpinAxis::x).matrix());
  const SparseCMatrix id = identity(basis.dim());
  return SparseCMatrix(kron(id, sx) - kron(SparseCMatrix(sx.transpose()), id));
}

}  // namespace

SparseCMatrix liouvillian_omega_derivative(const CollectiveSpinBasis& basis) {
  return Complex(0.0, -1.0) * sx_commutator(basis);
}

Superoperator build_liouvillian(const ModelParams& params) {
  params.validate();
  const CollectiveSpinBasis basis(params.n_spins);
  const Index d = basis.dim();
  const double s = basis.total_spin();

  const CMatrix up = spin_operator(basis, SpinAxis::plus).matrix();
  const CMatrix down = up.adjoint();
  const SparseCMatrix sp_t = sparse_of(up.transpose());
  const SparseCMatrix sm = sparse_of(down);
  const SparseCMatrix pm = sparse_of(up * down);
  const SparseCMatrix pm_t = sparse_of((up * down).transpose());
  const SparseCMatrix id = identity(d);

  // The Hamiltonian part is kept structurally even at omega == 0 so the
  // sparsity pattern depends on N only.
  SparseCMatrix hamiltonian = Complex(0.0, -params.omega) * sx_commutator(basis);
  SparseCMatrix dissipator = kron(sp_t, sm) - 0.5 * kron(id, pm) - 0.5 * kron(pm_t, id);
  SparseCMatrix total = hamiltonian + (params.kappa / s) * dissipator;
  return Superoperator(params, std::move(total));
}

DensityMatrix SteadyStateSolver::solve(const Superoperator& superop,
                                       SteadyStateDiagnostics* diag) {
  const Index d = superop.basis().dim();
  const Index n = superop.size();
  const SparseCMatrix& l = superop.matrix();

  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(static_cast<std::size_t>(l.nonZeros() + d));
  for (Index k = 0; k < l.outerSize(); ++k) {
    for (SparseCMatrix::InnerIterator it(l, k); it; ++it) {
      if (it.row() != 0) triplets.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Index i = 0; i < d; ++i) triplets.emplace_back(0, i * d + i, 1.0);
  SparseCMatrix system(n, n);
  system.setFromTriplets(triplets.begin(), triplets.end());
  system.makeCompressed();

  const std::pair<Index, Index> pattern{n, system.nonZeros()};
  const bool reuse = pattern_ && *pattern_ == pattern;
  if (!reuse) {
    lu_.analyzePattern(system);
    pattern_ = pattern;
  }
  lu_.factorize(system);
  if (lu_.info() != Eigen::Success) {
    pattern_.reset();
    throw SolverError("steady_state: trace-constrained system is singular (degenerate steady "
                      "state?): " + lu_.lastErrorMessage());
  }
  CVector rhs = CVector::Zero(n);
  rhs(0) = 1.0;
  const CVector x = lu_.solve(rhs);
  if (lu_.info() != Eigen::Success || !x.allFinite()) {
    throw SolverError("steady_state: sparse solve failed");
  }

  CMatrix rho = unvec(x, d);
  const double residual = (l * x).norm() / (superop.frobenius_norm() * x.norm());
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (residual > options_.residual_tolerance) {
    throw SolverError("steady_state: residual " + std::to_string(residual) +
                      " exceeds tolerance (degenerate or ill-conditioned null space)");
  }
  if (herm > options_.hermiticity_tolerance) {
    throw SolverError("steady_state: solution not Hermitian (defect " + std::to_string(herm) +
                      ")");
  }
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace();

  DensityMatrix out(superop.basis(), std::move(rho));
  if (diag != nullptr) {
    diag->residual = residual;
    diag->hermiticity_defect = herm;
    diag->min_eigenvalue = out.eigenvalues().minCoeff();
    diag->reused_analysis = reuse;
  }
  return out;
}

DensityMatrix steady_state(const Superoperator& superop, SteadyStateDiagnostics* diag) {
  SteadyStateSolver solver;
  return solver.solve(superop, diag);
}

namespace {

Eigen::BDCSVD<CMatrix> dense_svd(const Superoperator& superop) {
  const CMatrix dense(superop.matrix());
  return Eigen::BDCSVD<CMatrix>(dense, Eigen::ComputeFullV);
}

Index count_null(const RVector& sv, double tol) {
  Index count = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) <= tol * sv(0)) ++count;
  }
  return count;
}

}  // namespace

Index null_space_dimension(const Superoperator& superop, double tol) {
  return count_null(dense_svd(superop).singularValues(), tol);
}

DensityMatrix dense_steady_state(const Superoperator& superop, double tol) {
  const auto svd = dense_svd(superop);
  const Index nulls = count_null(svd.singularValues(), tol);
  if (nulls != 1) {
    throw SolverError("dense_steady_state: null space dimension " + std::to_string(nulls) +
                      " != 1");
  }
  const CVector v = svd.matrixV().col(svd.matrixV().cols() - 1);
  CMatrix rho = unvec(v, superop.basis().dim());
  rho /= rho.trace();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(superop.basis(), std::move(rho));
}

DensityMatrix parity_conjugate(const DensityMatrix& rho) {
  const RVector z = parity_signs(rho.basis());
  CMatrix m = z.asDiagonal() * rho.matrix() * z.asDiagonal();
  return DensityMatrix(rho.basis(), std::move(m));
}

}  // namespace btc
