// metrology.hpp: fidelity, quantum and classical Fisher information with respect
// to omega, spin-projection measurements and the time-constrained QFI bound.

#pragma once

#include "btc/evolution.hpp"
#include "btc/liouvillian.hpp"

#include <optional>
#include <string>
#include <vector>

namespace btc {

enum class FisherKind { quantum, classical };

struct FisherResult {
  double omega_over_kappa = 0.0;
  int n_spins = 0;
  double value = 0.0;         // Richardson-extrapolated estimate
  double delta_omega = 0.0;   // coarse finite-difference step
  FisherKind kind = FisherKind::quantum;
  double coarse_value = 0.0;  // estimate with step delta_omega
  double fine_value = 0.0;    // estimate with step delta_omega / 2
};

struct MeasurementSetting {
  double theta = 0.0;  // [0, pi]
  double phi = 0.0;    // [0, pi]

  // Throws std::invalid_argument outside [0, pi] x [0, pi].
  void validate() const;
};

/// Uhlmann fidelity Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)), evaluated as the sum of
/// singular values of sqrt(rho1) sqrt(rho2). Eigenvalues below 1e-12 are clipped
/// to zero before taking square roots. Result is clamped to [0, 1].
double fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2);

// Steady states at omega -/+ delta and omega -/+ delta/2, the stencil shared by QFI and CFI.
struct DerivativeStencil {
  ModelParams params;
  double delta_omega = 0.0;
  std::vector<DensityMatrix> states;  // order: -d, +d, -d/2, +d/2
};

// Negative stencil points use rho_ss(-w) = Z rho_ss(w) Z.
DerivativeStencil steady_state_stencil(const ModelParams& params, double delta_omega,
                                       SteadyStateSolver& solver);

// Steady state at any real omega through the parity map.
DensityMatrix signed_steady_state(int n_spins, double omega, double kappa,
                                  SteadyStateSolver& solver);

// Relative change between the delta and delta/2 estimates allowed by the refinement check.
inline constexpr double kRefinementTolerance = 0.01;

FisherResult qfi_from_stencil(const DerivativeStencil& stencil);

// Throws ConvergenceError when the d and d/2 estimates differ by more than kRefinementTolerance.
void require_refined(const FisherResult& result, const std::string& what);

/// QFI from fidelity of neighbouring steady states,
/// F_Q = 8 (1 - F(rho_{w-d}, rho_{w+d})) / (2d)^2, evaluated at d and d/2.
/// Throws ConvergenceError if the two differ by more than 1%.
FisherResult qfi_fidelity(const ModelParams& params, double delta_omega = 1e-3);
FisherResult qfi_fidelity(const ModelParams& params, double delta_omega,
                          SteadyStateSolver& solver);

/// p(s) = <s|rho|s> over the eigenbasis of S_n, ascending s. Entries down to
/// -1e-10 are clipped to zero and the vector renormalized; SolverError if more
/// than 1e-8 of probability mass had to be clipped.
std::vector<double> measurement_probabilities(const DensityMatrix& rho,
                                              const MeasurementSetting& setting);

struct ClassicalFisher {
  FisherResult fisher;
  std::size_t excluded_outcomes = 0;   // outcomes with p < 1e-12
  double excluded_derivative_mass = 0.0;  // sum |dp| over excluded outcomes
};

ClassicalFisher cfi_from_stencil(const DerivativeStencil& stencil,
                                 const MeasurementSetting& setting);
ClassicalFisher cfi(const ModelParams& params, const MeasurementSetting& setting,
                    double delta_omega = 1e-3);

// Probabilities of all S_n outcomes for fixed theta as a trigonometric series in phi.
// Evaluating a new phi costs O(dim^2) instead of an eigendecomposition.
class ProjectionSeries {
 public:
  ProjectionSeries(const DensityMatrix& rho, const RMatrix& rotation_y);
  // Outcome order matches measurement_probabilities (ascending s). No clipping applied.
  RVector probabilities(double phi) const;

 private:
  CMatrix bands_;  // bands_(k, s): coefficient of exp(i phi k), k = 0..dim-1
};

struct CfiOptimum {
  MeasurementSetting setting;
  FisherResult fisher;
  double grid_best = 0.0;  // best CFI on the grid (coarse+fine extrapolated)
  bool refined = false;    // parabolic refinement improved on the grid
};

std::vector<double> linspace(double lo, double hi, std::size_t count);

/// Grid search over (theta, phi) followed by parabolic refinement inside the
/// best cell. Ties go to the smallest theta, then the smallest phi. The
/// returned value is never below any grid sample.
CfiOptimum optimize_cfi_from_stencil(const DerivativeStencil& stencil,
                                     const std::vector<double>& theta_grid,
                                     const std::vector<double>& phi_grid);
CfiOptimum optimize_cfi(const ModelParams& params, const std::vector<double>& theta_grid,
                        const std::vector<double>& phi_grid, double delta_omega = 1e-3);

// Upper bound on F_Q / T for this master equation: N / (2 kappa).
double qfi_time_bound(int n_spins, double kappa);

struct AlphaConstraintReport {
  double gamma1 = 0.0;
  double constraint_residual = 0.0;  // max |Sx + gamma1 sqrt(kappa/S)(S+ + S-)|
  double alpha_norm = 0.0;           // operator norm of |gamma1|^2 I
  double expected_alpha_norm = 0.0;  // S / (4 kappa)
  double time_bound = 0.0;           // qfi_time_bound(N, kappa)
  bool satisfied = false;
};

AlphaConstraintReport verify_alpha_constraint(const CollectiveSpinBasis& basis, double kappa);

struct TrajectoryQfi {
  double time = 0.0;
  FisherResult qfi;
  double rate = 0.0;   // F_Q(T) / T
  double bound = 0.0;  // N / (2 kappa)
  bool bound_satisfied = false;
};

/// Evolves `initial_state` for time T under L(w -/+ d) and L(w -/+ d/2) with a
/// shared step sequence, then applies the fidelity QFI formula to rho(T).
TrajectoryQfi qfi_rate_trajectory(const ModelParams& params, const DensityMatrix& initial_state,
                                  double time, double delta_omega = 1e-3,
                                  const EvolveOptions& options = {});

// Same protocol for several times from one shared integration (times strictly increasing).
std::vector<TrajectoryQfi> qfi_rate_series(const ModelParams& params,
                                           const DensityMatrix& initial_state,
                                           const std::vector<double>& times,
                                           double delta_omega = 1e-3,
                                           const EvolveOptions& options = {});

std::string to_string(FisherKind kind);

}  // namespace btc
