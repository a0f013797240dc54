#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace oracle {

CMatrix ladder_plus(int n) {
  const double s = 0.5 * n;
  CMatrix sp = CMatrix::Zero(n + 1, n + 1);
  for (int i = 1; i <= n; ++i) {
    const double m = s - i;  // |m> at index i goes to |m+1> at index i-1
    sp(i - 1, i) = std::sqrt(s * (s + 1) - m * (m + 1));
  }
  return sp;
}

CMatrix spin_x(int n) {
  const CMatrix sp = ladder_plus(n);
  return 0.5 * (sp + sp.adjoint());
}

CMatrix lindblad_rhs(int n, double omega, double kappa, const CMatrix& rho) {
  const double s = 0.5 * n;
  const CMatrix sp = ladder_plus(n);
  const CMatrix sm = sp.adjoint();
  const CMatrix sx = spin_x(n);
  const CMatrix spsm = sp * sm;
  const std::complex<double> i(0.0, 1.0);
  return -i * omega * (sx * rho - rho * sx) +
         (kappa / s) * (sm * rho * sp - 0.5 * (spsm * rho + rho * spsm));
}

CMatrix dense_superoperator(int n, double omega, double kappa) {
  const int d = n + 1;
  CMatrix l(d * d, d * d);
  for (int col = 0; col < d; ++col) {
    for (int row = 0; row < d; ++row) {
      CMatrix e = CMatrix::Zero(d, d);
      e(row, col) = 1.0;
      const CMatrix out = lindblad_rhs(n, omega, kappa, e);
      l.col(col * d + row) = Eigen::Map<const Eigen::VectorXcd>(out.data(), d * d);
    }
  }
  return l;
}

namespace {

// [L; vec(I)^T] x = [b; t], solved in the least-squares sense (consistent system).
Eigen::VectorXcd bordered_solve(const CMatrix& l, const Eigen::VectorXcd& b, double trace, int d) {
  const int n = d * d;
  CMatrix a(n + 1, n);
  a.topRows(n) = l;
  a.row(n).setZero();
  for (int k = 0; k < d; ++k) a(n, k * d + k) = 1.0;
  Eigen::VectorXcd rhs(n + 1);
  rhs.head(n) = b;
  rhs(n) = trace;
  return a.colPivHouseholderQr().solve(rhs);
}

}  // namespace

CMatrix dense_steady_state(int n, double omega, double kappa) {
  const int d = n + 1;
  const CMatrix l = dense_superoperator(n, omega, kappa);
  const Eigen::VectorXcd x = bordered_solve(l, Eigen::VectorXcd::Zero(d * d), 1.0, d);
  CMatrix rho = Eigen::Map<const CMatrix>(x.data(), d, d);
  return 0.5 * (rho + rho.adjoint());
}

CMatrix steady_state_derivative(int n, double omega, double kappa, const CMatrix& rho) {
  const int d = n + 1;
  const CMatrix l = dense_superoperator(n, omega, kappa);
  const CMatrix sx = spin_x(n);
  const std::complex<double> i(0.0, 1.0);
  const CMatrix source = i * (sx * rho - rho * sx);  // -(dL/domega) rho
  const Eigen::VectorXcd x =
      bordered_solve(l, Eigen::Map<const Eigen::VectorXcd>(source.data(), d * d), 0.0, d);
  CMatrix drho = Eigen::Map<const CMatrix>(x.data(), d, d);
  return 0.5 * (drho + drho.adjoint());
}

double qfi_sld_oracle(const btc::DensityMatrix& rho, const CMatrix& drho) {
  if (drho.rows() != rho.dim() || drho.cols() != rho.dim()) {
    throw std::invalid_argument("qfi_sld_oracle: shape mismatch");
  }
  if ((drho - drho.adjoint()).cwiseAbs().maxCoeff() > 1e-8) {
    throw std::invalid_argument("qfi_sld_oracle: drho not Hermitian");
  }
  if (std::abs(drho.trace()) > 1e-8) throw std::invalid_argument("qfi_sld_oracle: drho not traceless");

  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho.matrix());
  const Eigen::VectorXd lam = es.eigenvalues();
  const CMatrix v = es.eigenvectors();
  const CMatrix d = v.adjoint() * drho * v;
  double f = 0.0;
  for (Eigen::Index j = 0; j < lam.size(); ++j) {
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
      const double denom = lam(j) + lam(k);
      if (denom > 1e-12) f += 2.0 * std::norm(d(j, k)) / denom;
    }
  }
  return f;
}

}  // namespace oracle
