// scaling.hpp: finite-size-scaling collapse and peak finding.

#pragma once

#include "btc/power_law.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace btc {

enum class ObservableKind { magnetization, qfi };

ObservableKind parse_observable_kind(const std::string& label);
std::string to_string(ObservableKind kind);

struct ScalingRecord {
  int n_spins = 0;
  double x = 0.0;   // omega / kappa
  double y = 0.0;
  double dy = 0.0;  // > 0
};

struct ScalingDataset {
  std::vector<ScalingRecord> records;
  ObservableKind kind = ObservableKind::magnetization;
  // Optional per-size centers (e.g. omega_max(N)). When set, u is measured from
  // centers[N] instead of omega_c.
  std::map<int, double> centers;

  // Distinct sizes, ascending.
  std::vector<int> sizes() const;
  // Throws std::invalid_argument on duplicate (N, x), non-finite values or dy <= 0.
  void validate() const;
};

// Builds a dataset with dy = max(rel * |y|, 1e-9 * max|y|).
ScalingDataset make_dataset(ObservableKind kind, const std::vector<int>& ns,
                            const std::vector<double>& xs, const std::vector<double>& ys,
                            double dy_rel = 0.01);

struct ScaledPoint {
  int n_spins = 0;
  double u = 0.0;
  double v = 0.0;
  double dv = 0.0;
};

struct ScalingParams {
  double omega_c = 1.0;
  double nu = 1.0;
  double shape = 0.0;  // beta (magnetization) or eta (qfi)
};

// u = N^{1/nu} (x - omega_c); v = y N^{beta/nu - 1} (magnetization) or y N^{-eta/nu} (qfi).
std::vector<ScaledPoint> scale_dataset(const ScalingDataset& data, const ScalingParams& p);

// Inverse of scale_dataset for the same kind, centers and parameters.
std::vector<ScalingRecord> unscale_points(const std::vector<ScaledPoint>& points,
                                          ObservableKind kind, const ScalingParams& p,
                                          const std::map<int, double>& centers = {});

inline constexpr int kCollapseWindow = 6;

/// Cross-size prediction statistic. Each point is predicted by a weighted
/// linear fit through the kCollapseWindow nearest points (in u) of the other
/// sizes; points outside the span of those neighbours are skipped. The result
/// is the mean of (v - V)^2 / (dv^2 + dV^2). Independent of record order.
/// std::invalid_argument for fewer than 3 sizes, FitError when fewer than 3
/// points can be predicted.
double collapse_quality(std::vector<ScaledPoint> points);

struct CollapseOptions {
  double x_min = -1e300;  // records outside [x_min, x_max] are ignored
  double x_max = 1e300;
  int max_iterations = 2000;
  double tolerance = 1e-6;
  ScalingParams initial_step{0.02, 0.2, 0.1};
};

struct CollapseFit {
  ObservableKind kind = ObservableKind::magnetization;
  double omega_c = 0.0;
  double nu = 0.0;
  double shape_exponent = 0.0;
  double quality = 0.0;
  ScalingParams uncertainty;
  std::array<bool, 3> pinned{};  // omega_c, nu, shape within 0.1% of a bound
  bool centered_per_size = false;  // omega_c held fixed because centers were given
  int iterations = 0;
  std::size_t points = 0;
};

/// Nelder-Mead minimization of collapse_quality, restarted once from the first
/// optimum. Uncertainties are the half-widths at quality + 1 along each axis.
/// Needs at least 4 sizes. FitError when the simplex does not converge.
CollapseFit fit_collapse(const ScalingDataset& data, const ScalingParams& initial_guess,
                         const ScalingParams& lower, const ScalingParams& upper,
                         const CollapseOptions& options = {});

struct Peak {
  double x = 0.0;
  double y = 0.0;
  bool interior = true;  // false: the grid maximum sits on the boundary
};

// Three-point parabolic refinement around the largest sample; x strictly increasing.
Peak find_peak(const std::vector<double>& x, const std::vector<double>& y);

struct ConsistencyReport {
  double b = 0.0;
  double b_error = 0.0;
  double eta_over_nu = 0.0;
  double eta_over_nu_error = 0.0;
  double difference = 0.0;  // |b - eta/nu|
  double combined_error = 0.0;
  bool consistent = false;
};

// Compares the QFI peak exponent b with eta/nu from the collapse.
ConsistencyReport check_exponent_consistency(const PowerLawFit& peak_fit,
                                             const CollapseFit& collapse);

}  // namespace btc
