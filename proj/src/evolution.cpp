#include "btc/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace btc {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Member {
  const SparseCMatrix* l;
  Index dim;
  CVector y;
  CVector k1, k2, k3, k4, k5, k6, k7, trial, err;
};

double drift(const CVector& y, Index dim) {
  const Eigen::Map<const CMatrix> rho(y.data(), dim, dim);
  const double trace = std::abs(rho.trace() - 1.0);
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  return std::max(trace, herm);
}

}  // namespace

std::vector<Trajectory> evolve_family(std::span<const Superoperator> superops,
                                      std::span<const DensityMatrix> initial_states,
                                      std::span<const double> times,
                                      const EvolveOptions& options) {
  if (superops.size() != initial_states.size() || superops.empty()) {
    throw std::invalid_argument("evolve_family: need one initial state per superoperator");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0 || (i > 0 && !(times[i] > times[i - 1]))) {
      throw std::invalid_argument("evolve: times must be non-negative and strictly increasing");
    }
  }

  std::vector<Member> members;
  std::vector<Trajectory> out(superops.size());
  std::vector<Operator> sz;
  for (std::size_t i = 0; i < superops.size(); ++i) {
    if (!(superops[i].basis() == initial_states[i].basis())) {
      throw std::invalid_argument("evolve: state and superoperator bases differ");
    }
    Member m;
    m.l = &superops[i].matrix();
    m.dim = superops[i].basis().dim();
    m.y = vec(initial_states[i].matrix());
    members.push_back(std::move(m));
    sz.push_back(spin_operator(superops[i].basis(), SpinAxis::z));
  }

  auto record = [&](double t) {
    for (std::size_t i = 0; i < members.size(); ++i) {
      DensityMatrix rho(superops[i].basis(), unvec(members[i].y, members[i].dim));
      out[i].times.push_back(t);
      out[i].sz_per_n.push_back(expectation(rho, sz[i]) / superops[i].params().n_spins);
      if (options.keep_states) out[i].states.push_back(std::move(rho));
    }
  };

  double t = 0.0;
  double h = options.initial_step;
  bool have_k1 = false;
  Index accepted = 0;
  Index rejected = 0;

  for (double target : times) {
    while (t < target) {
      const bool last = t + h >= target;
      const double step = last ? target - t : h;

      double err_norm = 0.0;
      double drift_norm = 0.0;
      for (Member& m : members) {
        const SparseCMatrix& l = *m.l;
        if (!have_k1) m.k1 = l * m.y;
        m.k2 = l * (m.y + step * a21 * m.k1);
        m.k3 = l * (m.y + step * (a31 * m.k1 + a32 * m.k2));
        m.k4 = l * (m.y + step * (a41 * m.k1 + a42 * m.k2 + a43 * m.k3));
        m.k5 = l * (m.y + step * (a51 * m.k1 + a52 * m.k2 + a53 * m.k3 + a54 * m.k4));
        m.k6 = l * (m.y + step * (a61 * m.k1 + a62 * m.k2 + a63 * m.k3 + a64 * m.k4 +
                                  a65 * m.k5));
        m.trial = m.y + step * (b1 * m.k1 + b3 * m.k3 + b4 * m.k4 + b5 * m.k5 + b6 * m.k6);
        m.k7 = l * m.trial;
        m.err = step * (e1 * m.k1 + e3 * m.k3 + e4 * m.k4 + e5 * m.k5 + e6 * m.k6 + e7 * m.k7);
        err_norm = std::max(err_norm, m.err.cwiseAbs().maxCoeff());
        drift_norm = std::max(drift_norm, drift(m.trial, m.dim));
      }
      have_k1 = true;

      const bool ok = std::isfinite(err_norm) && err_norm <= options.tolerance &&
                      drift_norm <= options.invariant_tolerance;
      const double ratio = err_norm > 0.0 ? options.tolerance / err_norm : 5.0;
      const double factor = std::clamp(0.9 * std::pow(ratio, 0.2), 0.2, 5.0);
      if (ok) {
        for (Member& m : members) {
          m.y.swap(m.trial);
          m.k1.swap(m.k7);  // first-same-as-last
        }
        t = last ? target : t + step;
        ++accepted;
        if (!last || step >= h) h = step * factor;
      } else {
        ++rejected;
        h = step * std::min(factor, 0.5);
      }
      if (h < options.min_step) {
        throw SolverError("evolve: step-size underflow at t = " + std::to_string(t) +
                          " (error " + std::to_string(err_norm) + ", invariant drift " +
                          std::to_string(drift_norm) + ")");
      }
    }
    record(target);
  }

  for (Trajectory& tr : out) {
    tr.steps_accepted = accepted;
    tr.steps_rejected = rejected;
  }
  return out;
}

Trajectory evolve(const Superoperator& superop, const DensityMatrix& rho0,
                  std::span<const double> times, const EvolveOptions& options) {
  std::vector<Superoperator> ops{superop};
  std::vector<DensityMatrix> states{rho0};
  return std::move(evolve_family(ops, states, times, options).front());
}

}  // namespace btc
