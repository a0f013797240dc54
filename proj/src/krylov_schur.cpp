#include "btc/krylov_schur.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace btc {

namespace {

// Plane rotation [c s; -conj(s) c] with [c s; -conj(s) c] [f; g] = [r; 0].
void make_rotation(Complex f, Complex g, double& c, Complex& s) {
  if (g == Complex(0.0)) {
    c = 1.0;
    s = 0.0;
    return;
  }
  if (f == Complex(0.0)) {
    c = 0.0;
    s = std::conj(g) / std::abs(g);
    return;
  }
  const double af = std::abs(f);
  const double norm = std::hypot(af, std::abs(g));
  c = af / norm;
  s = (f / af) * std::conj(g) / norm;
}

// x <- c x + s y ; y <- c y - conj(s) x   (elementwise, LAPACK zrot convention)
template <typename X, typename Y>
void rotate(X&& x, Y&& y, double c, Complex s) {
  for (Index i = 0; i < x.size(); ++i) {
    const Complex tx = x(i);
    const Complex ty = y(i);
    x(i) = c * tx + s * ty;
    y(i) = c * ty - std::conj(s) * tx;
  }
}

}  // namespace

void swap_schur_diagonal(CMatrix& t, CMatrix& q, Index k) {
  const Index n = t.rows();
  const Complex t11 = t(k, k);
  const Complex t22 = t(k + 1, k + 1);
  double c = 1.0;
  Complex s = 0.0;
  make_rotation(t(k, k + 1), t22 - t11, c, s);
  if (k + 2 < n) {
    rotate(t.row(k).tail(n - k - 2), t.row(k + 1).tail(n - k - 2), c, s);
  }
  if (k > 0) {
    rotate(t.col(k).head(k), t.col(k + 1).head(k), c, std::conj(s));
  }
  t(k, k) = t22;
  t(k + 1, k + 1) = t11;
  rotate(q.col(k), q.col(k + 1), c, std::conj(s));
}

KrylovSchurResult krylov_schur(const LinearMap& op, Index n, const KrylovSchurOptions& options) {
  if (n < 1) throw std::invalid_argument("krylov_schur: empty operator");
  const Index nev = std::min(options.nev, n);
  if (nev < 1) throw std::invalid_argument("krylov_schur: nev must be >= 1");
  Index m = options.ncv > 0 ? options.ncv : std::max<Index>(2 * nev + 1, 20);
  m = std::min(m, n);
  if (m <= nev && m < n) m = std::min(n, nev + 1);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  auto random_vector = [&]() {
    CVector v(n);
    for (Index i = 0; i < n; ++i) v(i) = Complex(normal(rng), normal(rng));
    return v;
  };

  CMatrix basis(n, m + 1);
  CMatrix h = CMatrix::Zero(m + 1, m);
  basis.col(0) = random_vector().normalized();
  Index kept = 0;

  KrylovSchurResult result;
  CVector w(n);
  const double eps = std::numeric_limits<double>::epsilon();

  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    for (Index j = kept; j < m; ++j) {
      op(basis.col(j), w);
      ++result.operator_applications;
      // Classical Gram-Schmidt with one reorthogonalization pass.
      CVector coeff = basis.leftCols(j + 1).adjoint() * w;
      w.noalias() -= basis.leftCols(j + 1) * coeff;
      const CVector again = basis.leftCols(j + 1).adjoint() * w;
      w.noalias() -= basis.leftCols(j + 1) * again;
      coeff += again;
      const double beta = w.norm();
      h.col(j).head(j + 1) = coeff;
      if (beta <= eps * std::max(1.0, coeff.norm())) {
        // Invariant subspace found: continue with a fresh orthogonal direction.
        h(j + 1, j) = 0.0;
        if (j + 1 >= n) {
          basis.col(j + 1).setZero();
          continue;
        }
        CVector r = random_vector();
        for (int pass = 0; pass < 2; ++pass) {
          r -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * r);
        }
        basis.col(j + 1) = r.normalized();
        continue;
      }
      h(j + 1, j) = beta;
      basis.col(j + 1) = w / beta;
    }

    Eigen::ComplexSchur<CMatrix> schur(h.topRows(m));
    if (schur.info() != Eigen::Success) throw SolverError("krylov_schur: Schur form failed");
    CMatrix t = schur.matrixT();
    CMatrix q = schur.matrixU();

    // Order Ritz values by descending magnitude with adjacent swaps.
    for (Index i = 0; i < m; ++i) {
      Index best = i;
      for (Index k = i + 1; k < m; ++k) {
        if (std::abs(t(k, k)) > std::abs(t(best, best))) best = k;
      }
      for (Index k = best; k > i; --k) swap_schur_diagonal(t, q, k - 1);
    }

    // Residual of Ritz pair i: |b^T Q y_i| with y_i the eigenvector of T.
    const Eigen::RowVectorXcd b = h.row(m) * q;
    result.values.assign(static_cast<std::size_t>(nev), 0.0);
    result.residuals.assign(static_cast<std::size_t>(nev), 0.0);
    Index converged = 0;
    for (Index i = 0; i < nev; ++i) {
      CVector y = CVector::Zero(m);
      y(i) = 1.0;
      for (Index r = i - 1; r >= 0; --r) {
        Complex acc = 0.0;
        for (Index c = r + 1; c <= i; ++c) acc += t(r, c) * y(c);
        Complex denom = t(r, r) - t(i, i);
        if (std::abs(denom) < eps * std::abs(t(i, i))) denom = eps * std::abs(t(i, i));
        y(r) = -acc / denom;
      }
      y.normalize();
      const double res = std::abs((b * y)(0));
      result.values[static_cast<std::size_t>(i)] = t(i, i);
      result.residuals[static_cast<std::size_t>(i)] = res;
      if (res <= options.tolerance * std::max(std::abs(t(i, i)), eps)) ++converged;
    }
    result.restarts = restart;
    if (converged == nev) return result;
    if (m == n) break;  // full space: Ritz values are exact up to rounding

    // Thick restart: keep the leading Schur vectors.
    const Index keep = std::min(m - 1, nev + (m - nev) / 2);
    CMatrix new_basis(n, m + 1);
    new_basis.leftCols(keep) = basis.leftCols(m) * q.leftCols(keep);
    new_basis.col(keep) = basis.col(m);
    basis = std::move(new_basis);
    CMatrix new_h = CMatrix::Zero(m + 1, m);
    new_h.topLeftCorner(keep, keep) = t.topLeftCorner(keep, keep);
    new_h.row(keep).head(keep) = b.head(keep);
    h = std::move(new_h);
    kept = keep;
  }

  if (m == n) return result;
  std::ostringstream msg;
  msg << "krylov_schur: not converged after " << options.max_restarts << " restarts; residuals:";
  for (double r : result.residuals) msg << ' ' << r;
  throw SolverError(msg.str());
}

}  // namespace btc
