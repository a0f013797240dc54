// snapshot.hpp: binary dumps of steady states and spectra keyed by (N, omega/kappa),
// one file per key plus a JSON sidecar with tolerances, solver and timestamp.

#pragma once

#include "btc/liouvillian.hpp"
#include "btc/spectrum.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace btc {

// "%.12g" formatting used for omega in every file name.
std::string format_key_number(double value);

// <dir>/<prefix>_N<n>_w<omega>
std::filesystem::path snapshot_stem(const std::filesystem::path& dir, const std::string& prefix,
                                    int n_spins, double omega_over_kappa);

void save_steady_state(const std::filesystem::path& dir, const DensityMatrix& rho,
                       const ModelParams& params, const SteadyStateOptions& options,
                       const SteadyStateDiagnostics& diagnostics);

// Throws std::runtime_error when the snapshot is missing or malformed.
DensityMatrix load_steady_state(const std::filesystem::path& dir, int n_spins,
                                double omega_over_kappa);

void save_spectrum(const std::filesystem::path& dir, const LiouvillianSpectrum& spectrum,
                   const ModelParams& params, const SpectrumOptions& options);

std::vector<Complex> load_spectrum(const std::filesystem::path& dir, int n_spins,
                                   double omega_over_kappa);

}  // namespace btc
