#include "btc/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace btc {

namespace {

constexpr double kClip = 1e-12;           // eigenvalue clipping in sqrt(rho)
constexpr double kMinProbability = 1e-12;  // CFI outcome exclusion

CMatrix clipped_sqrt(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (rho.matrix() + rho.matrix().adjoint()));
  if (solver.info() != Eigen::Success) throw SolverError("fidelity: eigendecomposition failed");
  RVector roots = solver.eigenvalues();
  for (Index i = 0; i < roots.size(); ++i) roots(i) = roots(i) > kClip ? std::sqrt(roots(i)) : 0.0;
  return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().adjoint();
}

double fd_qfi(const DensityMatrix& minus, const DensityMatrix& plus, double delta) {
  const double f = fidelity(minus, plus);
  return 8.0 * (1.0 - f) / (4.0 * delta * delta);
}

bool refinement_ok(double coarse, double fine) {
  const double scale = std::max(std::abs(coarse), std::abs(fine));
  return std::abs(fine - coarse) <= kRefinementTolerance * scale || scale < 1e-9;
}

double richardson(double coarse, double fine) {
  return std::max(0.0, (4.0 * fine - coarse) / 3.0);
}

FisherResult make_result(const DerivativeStencil& s, FisherKind kind, double coarse,
                         double fine) {
  FisherResult r;
  r.omega_over_kappa = s.params.omega / s.params.kappa;
  r.n_spins = s.params.n_spins;
  r.delta_omega = s.delta_omega;
  r.kind = kind;
  r.coarse_value = coarse;
  r.fine_value = fine;
  r.value = richardson(coarse, fine);
  return r;
}

}  // namespace

void require_refined(const FisherResult& r, const std::string& what) {
  if (!refinement_ok(r.coarse_value, r.fine_value)) {
    throw ConvergenceError(what + ": finite-difference estimate did not settle (d: " +
                               std::to_string(r.coarse_value) +
                               ", d/2: " + std::to_string(r.fine_value) + ")",
                           r.coarse_value, r.fine_value);
  }
}

namespace {

// Classical Fisher information from probabilities at w -/+ delta (central differences,
// derivative mass of excluded outcomes accumulated into `excluded`).
double fd_cfi(const RVector& minus, const RVector& plus, double delta, std::size_t* count,
              double* excluded) {
  double total = 0.0;
  for (Index s = 0; s < minus.size(); ++s) {
    const double p = 0.5 * (minus(s) + plus(s));
    const double dp = (plus(s) - minus(s)) / (2.0 * delta);
    if (p < kMinProbability) {
      if (count != nullptr) ++*count;
      if (excluded != nullptr) *excluded += std::abs(dp);
      continue;
    }
    total += dp * dp / p;
  }
  return total;
}

RVector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const RVector>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

void MeasurementSetting::validate() const {
  constexpr double pi = std::numbers::pi;
  if (!(theta >= 0.0 && theta <= pi) || !(phi >= 0.0 && phi <= pi)) {
    throw std::invalid_argument("MeasurementSetting: theta and phi must lie in [0, pi]");
  }
}

std::string to_string(FisherKind kind) {
  return kind == FisherKind::quantum ? "quantum" : "classical";
}

double fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  if (!(rho1.basis() == rho2.basis())) throw std::invalid_argument("fidelity: basis mismatch");
  const CMatrix product = clipped_sqrt(rho1) * clipped_sqrt(rho2);
  Eigen::BDCSVD<CMatrix> svd(product);
  const double f = svd.singularValues().sum();
  return std::clamp(f, 0.0, 1.0);
}

DensityMatrix signed_steady_state(int n_spins, double omega, double kappa,
                                  SteadyStateSolver& solver) {
  const Superoperator l = build_liouvillian({std::abs(omega), kappa, n_spins});
  DensityMatrix rho = solver.solve(l);
  if (omega < 0.0) return parity_conjugate(rho);
  return rho;
}

DerivativeStencil steady_state_stencil(const ModelParams& params, double delta_omega,
                                       SteadyStateSolver& solver) {
  params.validate();
  if (!(delta_omega > 0.0)) throw std::invalid_argument("delta_omega must be > 0");
  DerivativeStencil s{params, delta_omega, {}};
  const double w = params.omega;
  for (double offset : {-delta_omega, delta_omega, -0.5 * delta_omega, 0.5 * delta_omega}) {
    s.states.push_back(signed_steady_state(params.n_spins, w + offset, params.kappa, solver));
  }
  return s;
}

FisherResult qfi_from_stencil(const DerivativeStencil& stencil) {
  const double d = stencil.delta_omega;
  const double coarse = fd_qfi(stencil.states[0], stencil.states[1], d);
  const double fine = fd_qfi(stencil.states[2], stencil.states[3], 0.5 * d);
  return make_result(stencil, FisherKind::quantum, coarse, fine);
}

FisherResult qfi_fidelity(const ModelParams& params, double delta_omega,
                          SteadyStateSolver& solver) {
  const FisherResult r = qfi_from_stencil(steady_state_stencil(params, delta_omega, solver));
  require_refined(r, "qfi_fidelity");
  return r;
}

FisherResult qfi_fidelity(const ModelParams& params, double delta_omega) {
  SteadyStateSolver solver;
  return qfi_fidelity(params, delta_omega, solver);
}

std::vector<double> measurement_probabilities(const DensityMatrix& rho,
                                              const MeasurementSetting& setting) {
  setting.validate();
  const ProjectionEigenbasis eig = projection_eigenbasis(rho.basis(), setting.theta, setting.phi);
  const Index d = rho.dim();
  std::vector<double> p(static_cast<std::size_t>(d));
  double clipped = 0.0;
  for (Index s = 0; s < d; ++s) {
    const auto v = eig.vectors.col(s);
    const Complex value = v.dot(rho.matrix() * v);
    double ps = value.real();
    if (ps < 0.0) {
      clipped += -ps;
      if (ps < -1e-10) {
        throw SolverError("measurement_probabilities: probability " + std::to_string(ps) +
                          " below clipping floor");
      }
      ps = 0.0;
    }
    p[static_cast<std::size_t>(s)] = ps;
  }
  if (clipped > 1e-8) {
    throw SolverError("measurement_probabilities: clipped mass " + std::to_string(clipped));
  }
  double total = 0.0;
  for (double x : p) total += x;
  for (double& x : p) x /= total;
  return p;
}

ClassicalFisher cfi_from_stencil(const DerivativeStencil& stencil,
                                 const MeasurementSetting& setting) {
  std::vector<RVector> probs;
  for (const DensityMatrix& rho : stencil.states) {
    probs.push_back(to_vector(measurement_probabilities(rho, setting)));
  }
  ClassicalFisher out;
  const double d = stencil.delta_omega;
  const double coarse =
      fd_cfi(probs[0], probs[1], d, &out.excluded_outcomes, &out.excluded_derivative_mass);
  const double fine = fd_cfi(probs[2], probs[3], 0.5 * d, nullptr, nullptr);
  out.fisher = make_result(stencil, FisherKind::classical, coarse, fine);
  return out;
}

ClassicalFisher cfi(const ModelParams& params, const MeasurementSetting& setting,
                    double delta_omega) {
  SteadyStateSolver solver;
  const ClassicalFisher out =
      cfi_from_stencil(steady_state_stencil(params, delta_omega, solver), setting);
  require_refined(out.fisher, "cfi");
  return out;
}

ProjectionSeries::ProjectionSeries(const DensityMatrix& rho, const RMatrix& rotation_y) {
  const Index d = rho.dim();
  if (rotation_y.rows() != d || rotation_y.cols() != d) {
    throw std::invalid_argument("ProjectionSeries: rotation shape mismatch");
  }
  // Columns reversed so that outcome index 0 is s = -S.
  const RMatrix rot = rotation_y.rowwise().reverse();
  bands_ = CMatrix::Zero(d, d);
  const CMatrix& r = rho.matrix();
  for (Index k = 0; k < d; ++k) {
    for (Index i = 0; i + k < d; ++i) {
      const Complex c = r(i, i + k);
      if (c == Complex(0.0)) continue;
      bands_.row(k) += c * rot.row(i).cwiseProduct(rot.row(i + k)).cast<Complex>();
    }
  }
}

RVector ProjectionSeries::probabilities(double phi) const {
  const Index d = bands_.rows();
  Eigen::RowVectorXcd weights(d);
  weights(0) = 1.0;
  for (Index k = 1; k < d; ++k) weights(k) = 2.0 * std::polar(1.0, phi * static_cast<double>(k));
  return (weights * bands_).real().transpose();
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = (i + 1 == count) ? hi : lo + (hi - lo) * static_cast<double>(i) /
                                              static_cast<double>(count - 1);
  }
  return out;
}

namespace {

struct CfiSample {
  double value = 0.0;
  double coarse = 0.0;
  double fine = 0.0;
};

class CfiLandscape {
 public:
  explicit CfiLandscape(const DerivativeStencil& stencil) : stencil_(stencil) {}

  void set_theta(double theta) {
    const RMatrix rot = rotation_about_y(stencil_.states.front().basis(), theta);
    series_.clear();
    for (const DensityMatrix& rho : stencil_.states) series_.emplace_back(rho, rot);
  }

  CfiSample at(double phi) const {
    std::vector<RVector> p;
    for (const ProjectionSeries& s : series_) p.push_back(s.probabilities(phi).cwiseMax(0.0));
    const double d = stencil_.delta_omega;
    CfiSample out;
    out.coarse = fd_cfi(p[0], p[1], d, nullptr, nullptr);
    out.fine = fd_cfi(p[2], p[3], 0.5 * d, nullptr, nullptr);
    out.value = richardson(out.coarse, out.fine);
    return out;
  }

 private:
  const DerivativeStencil& stencil_;
  std::vector<ProjectionSeries> series_;
};

// Vertex of the parabola through three points, clamped to [x0, x2].
double parabola_vertex(double x0, double x1, double x2, double f0, double f1, double f2) {
  const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
  const double a = (x2 * (f1 - f0) + x1 * (f0 - f2) + x0 * (f2 - f1)) / denom;
  const double b = (x2 * x2 * (f0 - f1) + x1 * x1 * (f2 - f0) + x0 * x0 * (f1 - f2)) / denom;
  if (!(a < 0.0)) return x1;
  return std::clamp(-b / (2.0 * a), std::min(x0, x2), std::max(x0, x2));
}

std::vector<double> sorted_grid(std::vector<double> g, const char* name) {
  if (g.empty()) throw std::invalid_argument(std::string(name) + " grid must be nonempty");
  for (double x : g) {
    if (!(x >= 0.0 && x <= std::numbers::pi)) {
      throw std::invalid_argument(std::string(name) + " grid must lie in [0, pi]");
    }
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

}  // namespace

CfiOptimum optimize_cfi_from_stencil(const DerivativeStencil& stencil,
                                     const std::vector<double>& theta_grid,
                                     const std::vector<double>& phi_grid) {
  const std::vector<double> thetas = sorted_grid(theta_grid, "theta");
  const std::vector<double> phis = sorted_grid(phi_grid, "phi");
  CfiLandscape landscape(stencil);

  std::vector<std::vector<CfiSample>> grid(thetas.size());
  std::size_t bi = 0, bj = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    landscape.set_theta(thetas[i]);
    for (std::size_t j = 0; j < phis.size(); ++j) {
      grid[i].push_back(landscape.at(phis[j]));
      const double v = grid[i].back().value;
      if (v > best * (1.0 + 1e-12) || best < 0.0) {
        best = v;
        bi = i;
        bj = j;
      }
    }
  }

  CfiOptimum out;
  out.grid_best = best;
  out.setting = {thetas[bi], phis[bj]};
  CfiSample chosen = grid[bi][bj];

  double theta = thetas[bi];
  double phi = phis[bj];
  if (bi > 0 && bi + 1 < thetas.size()) {
    theta = parabola_vertex(thetas[bi - 1], thetas[bi], thetas[bi + 1], grid[bi - 1][bj].value,
                            grid[bi][bj].value, grid[bi + 1][bj].value);
  }
  if (bj > 0 && bj + 1 < phis.size()) {
    phi = parabola_vertex(phis[bj - 1], phis[bj], phis[bj + 1], grid[bi][bj - 1].value,
                          grid[bi][bj].value, grid[bi][bj + 1].value);
  }
  if (theta != thetas[bi] || phi != phis[bj]) {
    landscape.set_theta(theta);
    const CfiSample refined = landscape.at(phi);
    if (refined.value > chosen.value) {
      chosen = refined;
      out.setting = {theta, phi};
      out.refined = true;
    }
  }

  out.fisher = make_result(stencil, FisherKind::classical, chosen.coarse, chosen.fine);
  return out;
}

CfiOptimum optimize_cfi(const ModelParams& params, const std::vector<double>& theta_grid,
                        const std::vector<double>& phi_grid, double delta_omega) {
  SteadyStateSolver solver;
  return optimize_cfi_from_stencil(steady_state_stencil(params, delta_omega, solver), theta_grid,
                                   phi_grid);
}

double qfi_time_bound(int n_spins, double kappa) {
  if (n_spins < 1) throw std::invalid_argument("qfi_time_bound: n_spins must be >= 1");
  if (!(kappa > 0.0)) throw std::invalid_argument("qfi_time_bound: kappa must be > 0");
  return static_cast<double>(n_spins) / (2.0 * kappa);
}

AlphaConstraintReport verify_alpha_constraint(const CollectiveSpinBasis& basis, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("verify_alpha_constraint: kappa must be > 0");
  const double s = basis.total_spin();
  AlphaConstraintReport r;
  r.gamma1 = -0.5 * std::sqrt(s / kappa);

  const CMatrix sx = spin_operator(basis, SpinAxis::x).matrix();
  const CMatrix ladder_sum =
      spin_operator(basis, SpinAxis::plus).matrix() + spin_operator(basis, SpinAxis::minus).matrix();
  const CMatrix residual = sx + r.gamma1 * std::sqrt(kappa / s) * ladder_sum;
  r.constraint_residual = residual.cwiseAbs().maxCoeff();

  // alpha = |gamma1|^2 I once gamma2 = gamma3 = 0; its operator norm is the largest singular value.
  const CMatrix alpha =
      std::norm(r.gamma1) * CMatrix::Identity(basis.dim(), basis.dim());
  r.alpha_norm = Eigen::JacobiSVD<CMatrix>(alpha).singularValues()(0);
  r.expected_alpha_norm = s / (4.0 * kappa);
  r.time_bound = qfi_time_bound(basis.n_spins(), kappa);
  const double eps = std::numeric_limits<double>::epsilon();
  r.satisfied = r.constraint_residual <= 1e-12 &&
                std::abs(r.alpha_norm - r.expected_alpha_norm) <= 4 * eps * r.expected_alpha_norm &&
                std::abs(4.0 * r.alpha_norm - r.time_bound) <= 4 * eps * r.time_bound;
  return r;
}

std::vector<TrajectoryQfi> qfi_rate_series(const ModelParams& params,
                                           const DensityMatrix& initial_state,
                                           const std::vector<double>& times, double delta_omega,
                                           const EvolveOptions& options) {
  params.validate();
  if (times.empty()) throw std::invalid_argument("qfi_rate_series: no times");
  for (double t : times) {
    if (!(t > 0.0)) throw std::invalid_argument("qfi_rate_trajectory: T must be > 0");
  }
  if (!(delta_omega > 0.0)) throw std::invalid_argument("delta_omega must be > 0");

  std::vector<Superoperator> ops;
  std::vector<DensityMatrix> starts;
  std::vector<bool> mirrored;
  for (double offset : {-delta_omega, delta_omega, -0.5 * delta_omega, 0.5 * delta_omega}) {
    const double w = params.omega + offset;
    ops.push_back(build_liouvillian({std::abs(w), params.kappa, params.n_spins}));
    mirrored.push_back(w < 0.0);
    starts.push_back(w < 0.0 ? parity_conjugate(initial_state) : initial_state);
  }
  EvolveOptions opts = options;
  opts.keep_states = true;
  const std::vector<Trajectory> runs = evolve_family(ops, starts, times, opts);

  const double bound = qfi_time_bound(params.n_spins, params.kappa);
  std::vector<TrajectoryQfi> out;
  for (std::size_t k = 0; k < times.size(); ++k) {
    DerivativeStencil stencil{params, delta_omega, {}};
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const DensityMatrix& state = runs[i].states[k];
      stencil.states.push_back(mirrored[i] ? parity_conjugate(state) : state);
    }
    TrajectoryQfi r;
    r.time = times[k];
    r.qfi = qfi_from_stencil(stencil);
    require_refined(r.qfi, "qfi_rate_trajectory");
    r.rate = r.qfi.value / r.time;
    r.bound = bound;
    r.bound_satisfied = r.rate <= bound;
    out.push_back(r);
  }
  return out;
}

TrajectoryQfi qfi_rate_trajectory(const ModelParams& params, const DensityMatrix& initial_state,
                                  double time, double delta_omega, const EvolveOptions& options) {
  return qfi_rate_series(params, initial_state, {time}, delta_omega, options).front();
}

}  // namespace btc
