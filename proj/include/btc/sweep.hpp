// sweep.hpp: sweep configuration, cached parameter sweeps and the figure pipelines
// built on top of them.

#pragma once

#include "btc/evolution.hpp"
#include "btc/liouvillian.hpp"
#include "btc/metrology.hpp"
#include "btc/scaling.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace btc {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Task { trajectory, spectrum, magnetization, qfi, cfi, collapse, fits, bound };

Task parse_task(const std::string& label);
std::string to_string(Task task);
// Tasks that fill columns of sweep.csv for each (N, omega).
bool is_point_task(Task task);

struct SweepConfig {
  std::vector<int> n_list{6, 10, 20, 40, 80, 120, 160, 200};
  std::vector<double> omega_grid = linspace(0.2, 1.6, 81);
  // Explicit (N, omega/kappa) points; replaces the n_list x omega_grid product when nonempty.
  std::vector<std::pair<int, double>> points;
  double kappa = 1.0;
  std::vector<Task> tasks{Task::magnetization};
  double delta_omega = 1e-3;
  SteadyStateOptions steady;
  double spectrum_tolerance = 1e-12;
  EvolveOptions evolve;
  std::filesystem::path out = "btc_out";
  std::filesystem::path cache_dir;     // empty: same as out
  std::string csv_name = "sweep.csv";
  int workers = 1;
  bool force = false;
  std::optional<int> nmax;
  std::size_t theta_points = 61;
  std::size_t phi_points = 31;
  std::size_t refine_points = 21;
  double dy_rel = 0.01;
  double window_min = 0.8;
  double window_max = 1.2;
  std::string initial_state = "down";  // down |S,-S>, up |S,S>, mixed
  bool snapshots = false;
  bool quiet = false;

  // Throws ConfigError.
  void validate() const;
  // Points to compute: nmax applied, sorted by (N, omega), duplicates removed.
  std::vector<std::pair<int, double>> sweep_points() const;
  std::vector<int> sizes() const;  // n_list with nmax applied
  bool wants(Task task) const;
  // FNV-1a hash over the settings that change the values computed by `task`.
  std::string tolerance_hash(Task task) const;
};

// Fields absent from the JSON keep their defaults. ConfigError on bad input.
SweepConfig config_from_json(const std::string& text, SweepConfig base = {});
SweepConfig load_config(const std::filesystem::path& path, SweepConfig base = {});

DensityMatrix initial_state(const CollectiveSpinBasis& basis, const std::string& label);

struct SweepRecord {
  int n_spins = 0;
  double omega_over_kappa = 0.0;
  std::optional<double> sz_ss_per_n;
  std::optional<double> qfi;
  std::optional<double> cfi_max;
  std::optional<double> theta_opt;
  std::optional<double> phi_opt;
  std::optional<double> e2_abs;  // slowest nonzero decay rate |Re E2|
  std::map<std::string, double> diagnostics;
};

struct TaskFailure {
  int n_spins = 0;
  double omega_over_kappa = 0.0;
  Task task = Task::magnetization;
  std::string message;
};

struct SweepResult {
  std::vector<SweepRecord> records;  // sorted by (N, omega)
  std::vector<TaskFailure> failures;
  std::size_t computed = 0;  // (point, task) pairs evaluated in this run
  std::size_t cached = 0;    // (point, task) pairs taken from the cache

  // 0 success, 1 when any task failed.
  int exit_code() const { return failures.empty() ? 0 : 1; }
  const SweepRecord* find(int n, double omega) const;
};

inline const char* kSweepHeader = "n,omega_over_kappa,sz_ss_per_n,qfi,cfi_max,theta_opt,phi_opt,e2_abs";

/// Computes the point tasks of `config` for every sweep point with a pool of
/// config.workers threads. Results are appended to <out>/cache.jsonl as they
/// arrive and <out>/sweep.csv is rewritten (sorted) after each point; cached
/// (N, omega, task, tolerance hash) entries are reused unless config.force.
/// Failures are collected per task and also written to <out>/failures.csv.
SweepResult run_sweep(const SweepConfig& config);

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRecord>& records);
std::vector<SweepRecord> read_sweep_csv(const std::filesystem::path& path);

// Collapse input from sweep rows: y = |<Sz>| = N |sz_ss_per_n| or y = qfi.
ScalingDataset dataset_from_records(const std::vector<SweepRecord>& records, ObservableKind kind,
                                    double dy_rel);

// --- pipelines -------------------------------------------------------------

struct PeakRow {
  int n_spins = 0;
  double omega_max = 0.0;
  double qfi_max = 0.0;
  bool interior = true;
};

struct QfiScan {
  SweepResult sweep;
  std::vector<PeakRow> peaks;
};

/// QFI over omega_grid for every size, then refine_points extra samples spanning
/// the two grid cells around each maximum; peaks from find_peak on the union.
QfiScan qfi_scan(const SweepConfig& config);

void write_peaks_csv(const std::filesystem::path& path, const std::vector<PeakRow>& peaks);
std::vector<PeakRow> read_peaks_csv(const std::filesystem::path& path);

struct CollapseDefaults {
  ScalingParams guess;
  ScalingParams lower;
  ScalingParams upper;
};
CollapseDefaults collapse_defaults(ObservableKind kind);

CollapseFit run_collapse(const std::vector<SweepRecord>& records, ObservableKind kind,
                         const SweepConfig& config);

struct BoundRow {
  int n_spins = 0;
  double omega_over_kappa = 0.0;
  double tau = 0.0;  // 1 / |Re E2|
  TrajectoryQfi result;
  double steady_qfi = 0.0;
};

// F_Q(T)/T at T = factor * tau for each factor, evolved from config.initial_state.
std::vector<BoundRow> bound_check(const ModelParams& params, const std::vector<double>& tau_factors,
                                  const SweepConfig& config);

}  // namespace btc
