// evolution.hpp: time integration of d rho/dt = L rho.

#pragma once

#include "btc/liouvillian.hpp"

#include <span>
#include <vector>

namespace btc {

struct EvolveOptions {
  double tolerance = 1e-9;          // max-norm local error per step
  double initial_step = 1e-3;
  double min_step = 1e-12;
  double invariant_tolerance = 1e-8;  // trace and Hermiticity drift allowed per step
  bool keep_states = true;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;  // empty unless keep_states
  std::vector<double> sz_per_n;       // <Sz>(t) / N at every recorded time
  Index steps_accepted = 0;
  Index steps_rejected = 0;
};

/// Integrates from t = 0 with an adaptive Dormand-Prince 5(4) scheme and
/// records the state at each requested time (strictly increasing, >= 0).
/// Steps that break the trace/Hermiticity tolerance are rejected; every
/// recorded state must satisfy the DensityMatrix invariants or InvariantError
/// is thrown. SolverError on step-size underflow.
Trajectory evolve(const Superoperator& superop, const DensityMatrix& rho0,
                  std::span<const double> times, const EvolveOptions& options = {});

// Integrates several systems with one shared step sequence (the error norm is
// the max over members), so differences between members are free of
// step-control noise.
std::vector<Trajectory> evolve_family(std::span<const Superoperator> superops,
                                      std::span<const DensityMatrix> initial_states,
                                      std::span<const double> times,
                                      const EvolveOptions& options = {});

}  // namespace btc
