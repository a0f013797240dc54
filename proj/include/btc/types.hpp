#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <stdexcept>
#include <string>

namespace btc {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using SparseCMatrix = Eigen::SparseMatrix<Complex>;
using Index = Eigen::Index;

// Numerical failure inside a solver (non-convergence, singular system, ...).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Finite-difference refinement did not settle.
class ConvergenceError : public SolverError {
 public:
  ConvergenceError(const std::string& what, double coarse, double fine)
      : SolverError(what), coarse_(coarse), fine_(fine) {}
  double coarse() const noexcept { return coarse_; }
  double fine() const noexcept { return fine_; }

 private:
  double coarse_;
  double fine_;
};

// A fit failed: optimizer did not converge, singular design, unusable data.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A physical invariant (Hermiticity, trace, positivity, ...) was violated.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace btc
