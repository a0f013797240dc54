// spectrum.hpp: slowest Liouvillian eigenvalues and the dominant decay rate.

#pragma once

#include "btc/liouvillian.hpp"

#include <string>
#include <vector>

namespace btc {

struct SpectrumOptions {
  // Dense LAPACK eigendecomposition when (N+1)^2 <= dense_limit, shift-invert otherwise.
  Index dense_limit = 4096;
  // Shift-invert targets in units of kappa. Empty means the single shift +0.01.
  std::vector<Complex> shifts;
  // Eigenvalues gathered around each shift: max(2k + 10, extra_per_shift).
  Index extra_per_shift = 0;
  double tolerance = 1e-12;
  int max_restarts = 500;
};

struct LiouvillianSpectrum {
  std::vector<Complex> eigenvalues;  // descending real part
  std::size_t count_requested = 0;
  std::string method;                // "dense" or "shift-invert"
  double max_residual = 0.0;         // relative Ritz residual (0 for dense)
};

/// The k eigenvalues with largest real part, sorted by descending real part
/// (ties by ascending imaginary part). On the shift-invert path this is the
/// top-k among the eigenvalues gathered closest to the configured shifts.
/// Throws SolverError on eigensolver failure and std::invalid_argument for
/// k outside [1, (N+1)^2].
LiouvillianSpectrum spectrum(const Superoperator& superop, std::size_t k,
                             const SpectrumOptions& options = {});

// Every eigenvalue of L via LAPACK zgeev, unsorted.
std::vector<Complex> dense_eigenvalues(const Superoperator& superop);

struct DecayRate {
  Complex eigenvalue;  // E2
  double rate = 0.0;   // |Re E2|
  double tau = 0.0;    // 1 / rate
};

// The `count` eigenvalues closest to `shift` (units of kappa), nearest first.
std::vector<Complex> eigenvalues_near(const Superoperator& superop, Complex shift, std::size_t count,
                                      const SpectrumOptions& options = {});

/// Leading (largest real part) eigenvalue of each oscillation band m = 0..count-1,
/// the bands sitting near Im E = m * Omega. Band 1 is the slowest eigenvalue with
/// Im E > band_threshold; band m+1 is searched around Im(band m) + spacing.
/// Meant for the oscillating phase; SolverError when no complex band is found.
std::vector<Complex> oscillation_bands(const Superoperator& superop, std::size_t count,
                                       const SpectrumOptions& options = {},
                                       double band_threshold = 1e-6);

// Slowest nonzero decay: the eigenvalue with largest real part among those
// with |E| > zero_tolerance.
DecayRate dominant_decay_rate(const Superoperator& superop, const SpectrumOptions& options = {},
                              double zero_tolerance = 1e-9);

// Deterministic ordering used by spectrum(): descending real part, then ascending imaginary part.
void sort_by_decay(std::vector<Complex>& values);

}  // namespace btc
