#include "btc/snapshot.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>

namespace btc {

namespace {

constexpr char kMagic[8] = {'B', 'T', 'C', 'S', 'N', 'A', 'P', '1'};

void write_blob(const std::filesystem::path& path, const Complex* data, std::uint64_t count) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(Complex)));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

std::vector<Complex> read_blob(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("snapshot not found: " + path.string());
  char magic[8];
  std::uint64_t count = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in || !std::equal(magic, magic + 8, kMagic)) {
    throw std::runtime_error("malformed snapshot: " + path.string());
  }
  std::vector<Complex> data(count);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(count * sizeof(Complex)));
  if (!in) throw std::runtime_error("truncated snapshot: " + path.string());
  return data;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

void write_sidecar(const std::filesystem::path& path, const nlohmann::json& meta) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << meta.dump(2) << '\n';
}

}  // namespace

std::string format_key_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::filesystem::path snapshot_stem(const std::filesystem::path& dir, const std::string& prefix,
                                    int n_spins, double omega_over_kappa) {
  return dir / (prefix + "_N" + std::to_string(n_spins) + "_w" + format_key_number(omega_over_kappa));
}

void save_steady_state(const std::filesystem::path& dir, const DensityMatrix& rho,
                       const ModelParams& params, const SteadyStateOptions& options,
                       const SteadyStateDiagnostics& diagnostics) {
  std::filesystem::create_directories(dir);
  const auto stem = snapshot_stem(dir, "steady", params.n_spins, params.omega / params.kappa);
  write_blob(stem.string() + ".bin", rho.matrix().data(),
             static_cast<std::uint64_t>(rho.matrix().size()));
  write_sidecar(stem.string() + ".json",
                {{"kind", "steady_state"},
                 {"n_spins", params.n_spins},
                 {"omega_over_kappa", params.omega / params.kappa},
                 {"kappa", params.kappa},
                 {"solver", "sparse LU, trace row replacement"},
                 {"tolerances",
                  {{"residual", options.residual_tolerance},
                   {"hermiticity", options.hermiticity_tolerance}}},
                 {"diagnostics",
                  {{"residual", diagnostics.residual},
                   {"hermiticity_defect", diagnostics.hermiticity_defect},
                   {"min_eigenvalue", diagnostics.min_eigenvalue}}},
                 {"timestamp", utc_timestamp()}});
}

DensityMatrix load_steady_state(const std::filesystem::path& dir, int n_spins,
                                double omega_over_kappa) {
  const auto stem = snapshot_stem(dir, "steady", n_spins, omega_over_kappa);
  std::vector<Complex> data = read_blob(stem.string() + ".bin");
  const CollectiveSpinBasis basis(n_spins);
  if (static_cast<Index>(data.size()) != basis.dim() * basis.dim()) {
    throw std::runtime_error("snapshot size does not match N: " + stem.string());
  }
  return DensityMatrix(basis, Eigen::Map<const CMatrix>(data.data(), basis.dim(), basis.dim()));
}

void save_spectrum(const std::filesystem::path& dir, const LiouvillianSpectrum& spectrum,
                   const ModelParams& params, const SpectrumOptions& options) {
  std::filesystem::create_directories(dir);
  const auto stem = snapshot_stem(dir, "spectrum", params.n_spins, params.omega / params.kappa);
  write_blob(stem.string() + ".bin", spectrum.eigenvalues.data(), spectrum.eigenvalues.size());
  write_sidecar(stem.string() + ".json",
                {{"kind", "spectrum"},
                 {"n_spins", params.n_spins},
                 {"omega_over_kappa", params.omega / params.kappa},
                 {"kappa", params.kappa},
                 {"solver", spectrum.method},
                 {"tolerances", {{"ritz", options.tolerance}, {"max_residual", spectrum.max_residual}}},
                 {"count", spectrum.eigenvalues.size()},
                 {"timestamp", utc_timestamp()}});
}

std::vector<Complex> load_spectrum(const std::filesystem::path& dir, int n_spins,
                                   double omega_over_kappa) {
  return read_blob(snapshot_stem(dir, "spectrum", n_spins, omega_over_kappa).string() + ".bin");
}

}  // namespace btc
