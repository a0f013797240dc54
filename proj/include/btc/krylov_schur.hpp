// krylov_schur.hpp: restarted Arnoldi (Krylov-Schur) for the largest-magnitude
// eigenvalues of a linear operator given only through its action.

#pragma once

#include "btc/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace btc {

struct KrylovSchurOptions {
  Index nev = 6;            // wanted eigenvalues
  Index ncv = 0;            // subspace size; 0 picks max(2*nev + 1, 20)
  int max_restarts = 500;
  double tolerance = 1e-12;  // relative residual of each Ritz pair
  std::uint64_t seed = 0x5eed;
};

struct KrylovSchurResult {
  std::vector<Complex> values;    // sorted by descending magnitude
  std::vector<double> residuals;  // |A y - theta y| estimates, same order
  int restarts = 0;
  Index operator_applications = 0;
};

using LinearMap = std::function<void(const CVector& in, CVector& out)>;

// Throws SolverError (with the residual norms) if not all nev pairs converge.
KrylovSchurResult krylov_schur(const LinearMap& op, Index n, const KrylovSchurOptions& options);

// Swap adjacent diagonal entries k, k+1 of an upper-triangular T, updating T <- G^H T G and Q <- Q G.
void swap_schur_diagonal(CMatrix& t, CMatrix& q, Index k);

}  // namespace btc
