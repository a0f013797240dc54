#include "btc/spectrum.hpp"

#include "btc/krylov_schur.hpp"

#include <lapacke.h>

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace btc {

void sort_by_decay(std::vector<Complex>& values) {
  std::sort(values.begin(), values.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() < b.imag();
  });
}

std::vector<Complex> dense_eigenvalues(const Superoperator& superop) {
  CMatrix a(superop.matrix());
  const auto n = static_cast<lapack_int>(a.rows());
  std::vector<Complex> w(static_cast<std::size_t>(n));
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, reinterpret_cast<lapack_complex_double*>(a.data()),
                    n, reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, 1, nullptr, 1);
  if (info != 0) {
    throw SolverError("dense_eigenvalues: zgeev failed with info " + std::to_string(info));
  }
  return w;
}

namespace {

bool contains_close(const std::vector<Complex>& values, Complex z) {
  return std::any_of(values.begin(), values.end(), [&](const Complex& v) {
    return std::abs(v - z) <= 1e-8 * std::max(1.0, std::abs(z));
  });
}

std::vector<Complex> shift_invert_eigenvalues(const Superoperator& superop, Complex shift,
                                              Index nev, const SpectrumOptions& options,
                                              double& max_residual) {
  const Index n = superop.size();
  SparseCMatrix shifted = superop.matrix();
  for (Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= shift;
  shifted.makeCompressed();

  Eigen::SparseLU<SparseCMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(shifted);
  lu.factorize(shifted);
  if (lu.info() != Eigen::Success) {
    throw SolverError("spectrum: factorization of L - sigma I failed: " + lu.lastErrorMessage());
  }
  const LinearMap op = [&lu](const CVector& in, CVector& out) { out = lu.solve(in); };

  KrylovSchurOptions ks;
  ks.nev = nev;
  ks.tolerance = options.tolerance;
  ks.max_restarts = options.max_restarts;
  const KrylovSchurResult res = krylov_schur(op, n, ks);

  std::vector<Complex> out;
  out.reserve(res.values.size());
  for (std::size_t i = 0; i < res.values.size(); ++i) {
    const Complex theta = res.values[i];
    out.push_back(shift + 1.0 / theta);
    max_residual = std::max(max_residual, res.residuals[i] / std::abs(theta));
  }
  return out;
}

}  // namespace

LiouvillianSpectrum spectrum(const Superoperator& superop, std::size_t k,
                             const SpectrumOptions& options) {
  const auto total = static_cast<std::size_t>(superop.size());
  if (k < 1 || k > total) {
    throw std::invalid_argument("spectrum: k must lie in [1, (N+1)^2]");
  }

  LiouvillianSpectrum out;
  out.count_requested = k;
  std::vector<Complex> values;

  if (superop.size() <= options.dense_limit) {
    values = dense_eigenvalues(superop);
    out.method = "dense";
  } else {
    out.method = "shift-invert";
    const double kappa = superop.params().kappa;
    std::vector<Complex> shifts = options.shifts;
    if (shifts.empty()) shifts.push_back(0.01);
    const Index per_shift = std::min<Index>(
        superop.size() - 2,
        std::max<Index>(static_cast<Index>(2 * k + 10), options.extra_per_shift));
    for (const Complex& s : shifts) {
      for (const Complex& z :
           shift_invert_eigenvalues(superop, s * kappa, per_shift, options, out.max_residual)) {
        if (!contains_close(values, z)) values.push_back(z);
      }
    }
    if (values.size() < k) {
      throw SolverError("spectrum: shift-invert produced fewer eigenvalues than requested");
    }
  }

  sort_by_decay(values);
  values.resize(k);
  out.eigenvalues = std::move(values);
  return out;
}

std::vector<Complex> eigenvalues_near(const Superoperator& superop, Complex shift, std::size_t count,
                                      const SpectrumOptions& options) {
  const auto total = static_cast<std::size_t>(superop.size());
  if (count < 1 || count > total) {
    throw std::invalid_argument("eigenvalues_near: count must lie in [1, (N+1)^2]");
  }
  const Complex sigma = shift * superop.params().kappa;
  std::vector<Complex> values;
  if (superop.size() <= options.dense_limit) {
    values = dense_eigenvalues(superop);
  } else {
    double residual = 0.0;
    const Index nev = std::min<Index>(superop.size() - 2,
                                      std::max<Index>(static_cast<Index>(count) + 10,
                                                      options.extra_per_shift));
    // Nudge off an exact eigenvalue so L - sigma I stays invertible.
    const Complex target = sigma == Complex(0.0) ? Complex(0.01 * superop.params().kappa) : sigma;
    values = shift_invert_eigenvalues(superop, target, nev, options, residual);
  }
  std::sort(values.begin(), values.end(), [&](const Complex& a, const Complex& b) {
    const double da = std::abs(a - sigma), db = std::abs(b - sigma);
    if (da != db) return da < db;
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() < b.imag();
  });
  values.resize(std::min(count, values.size()));
  return values;
}

std::vector<Complex> oscillation_bands(const Superoperator& superop, std::size_t count,
                                       const SpectrumOptions& options, double band_threshold) {
  if (count < 1) throw std::invalid_argument("oscillation_bands: count must be >= 1");
  const double kappa = superop.params().kappa;
  const auto leading = [](const std::vector<Complex>& values, auto&& in_band) {
    std::optional<Complex> best;
    for (const Complex& z : values) {
      if (in_band(z) && (!best || z.real() > best->real())) best = z;
    }
    return best;
  };

  const std::size_t probe = std::min<std::size_t>(60, static_cast<std::size_t>(superop.size()));
  const std::vector<Complex> first = eigenvalues_near(superop, 0.01, probe, options);
  std::vector<Complex> bands;
  bands.push_back(*leading(first, [&](const Complex& z) {
    return std::abs(z.imag()) <= band_threshold * kappa;
  }));
  if (count == 1) return bands;

  const auto b1 = leading(first, [&](const Complex& z) { return z.imag() > band_threshold * kappa; });
  if (!b1) throw SolverError("oscillation_bands: no complex eigenvalue among the slow modes");
  bands.push_back(*b1);

  while (bands.size() < count) {
    const double spacing = bands.back().imag() - bands[bands.size() - 2].imag();
    const double centre = bands.back().imag() + spacing;
    const std::vector<Complex> near =
        eigenvalues_near(superop, Complex(bands.back().real() / kappa, centre / kappa), probe, options);
    const auto next = leading(near, [&](const Complex& z) {
      return std::abs(z.imag() - centre) < 0.5 * spacing;
    });
    if (!next) throw SolverError("oscillation_bands: band " + std::to_string(bands.size()) + " not found");
    bands.push_back(*next);
  }
  return bands;
}

DecayRate dominant_decay_rate(const Superoperator& superop, const SpectrumOptions& options,
                              double zero_tolerance) {
  const LiouvillianSpectrum spec = spectrum(superop, std::min<std::size_t>(6, superop.size()),
                                            options);
  for (const Complex& e : spec.eigenvalues) {
    if (std::abs(e) > zero_tolerance) {
      DecayRate out;
      out.eigenvalue = e;
      out.rate = std::abs(e.real());
      out.tau = 1.0 / out.rate;
      return out;
    }
  }
  throw SolverError("dominant_decay_rate: no nonzero eigenvalue among the slowest modes");
}

}  // namespace btc
