#include "btc/scaling.hpp"

#include "gsl_support.hpp"

#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <set>
#include <functional>
#include <tuple>

namespace btc {

ObservableKind parse_observable_kind(const std::string& label) {
  if (label == "magnetization") return ObservableKind::magnetization;
  if (label == "qfi") return ObservableKind::qfi;
  throw std::invalid_argument("unknown observable kind '" + label + "' (magnetization, qfi)");
}

std::string to_string(ObservableKind kind) {
  return kind == ObservableKind::magnetization ? "magnetization" : "qfi";
}

std::vector<int> ScalingDataset::sizes() const {
  std::set<int> s;
  for (const auto& r : records) s.insert(r.n_spins);
  return {s.begin(), s.end()};
}

void ScalingDataset::validate() const {
  std::set<std::pair<int, double>> seen;
  for (const auto& r : records) {
    if (r.n_spins < 1) throw std::invalid_argument("ScalingDataset: N must be >= 1");
    if (!std::isfinite(r.x) || !std::isfinite(r.y) || !std::isfinite(r.dy)) {
      throw std::invalid_argument("ScalingDataset: non-finite record");
    }
    if (!(r.dy > 0.0)) throw std::invalid_argument("ScalingDataset: dy must be > 0");
    if (!seen.insert({r.n_spins, r.x}).second) {
      throw std::invalid_argument("ScalingDataset: duplicate (N, x) record");
    }
  }
  for (int n : sizes()) {
    if (!centers.empty() && !centers.contains(n)) {
      throw std::invalid_argument("ScalingDataset: missing center for N = " + std::to_string(n));
    }
  }
}

ScalingDataset make_dataset(ObservableKind kind, const std::vector<int>& ns,
                            const std::vector<double>& xs, const std::vector<double>& ys,
                            double dy_rel) {
  if (ns.size() != xs.size() || ns.size() != ys.size()) {
    throw std::invalid_argument("make_dataset: column length mismatch");
  }
  double ymax = 0.0;
  for (double y : ys) ymax = std::max(ymax, std::abs(y));
  const double floor = ymax > 0.0 ? 1e-9 * ymax : 1e-9;
  ScalingDataset d;
  d.kind = kind;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    d.records.push_back({ns[i], xs[i], ys[i], std::max(dy_rel * std::abs(ys[i]), floor)});
  }
  d.validate();
  return d;
}

namespace {

double amplitude_exponent(ObservableKind kind, const ScalingParams& p) {
  return kind == ObservableKind::magnetization ? p.shape / p.nu - 1.0 : -p.shape / p.nu;
}

double center_for(int n, const ScalingParams& p, const std::map<int, double>& centers) {
  if (centers.empty()) return p.omega_c;
  return centers.at(n);
}

void check_params(const ScalingParams& p) {
  if (!(p.nu > 0.0) || !std::isfinite(p.nu) || !std::isfinite(p.shape) ||
      !std::isfinite(p.omega_c)) {
    throw std::invalid_argument("scaling parameters must be finite with nu > 0");
  }
}

}  // namespace

std::vector<ScaledPoint> scale_dataset(const ScalingDataset& data, const ScalingParams& p) {
  check_params(p);
  const double amp = amplitude_exponent(data.kind, p);
  std::vector<ScaledPoint> out;
  out.reserve(data.records.size());
  for (const auto& r : data.records) {
    const double n = r.n_spins;
    const double s = std::pow(n, amp);
    out.push_back({r.n_spins, std::pow(n, 1.0 / p.nu) * (r.x - center_for(r.n_spins, p, data.centers)),
                   r.y * s, r.dy * s});
  }
  return out;
}

std::vector<ScalingRecord> unscale_points(const std::vector<ScaledPoint>& points,
                                          ObservableKind kind, const ScalingParams& p,
                                          const std::map<int, double>& centers) {
  check_params(p);
  const double amp = amplitude_exponent(kind, p);
  std::vector<ScalingRecord> out;
  out.reserve(points.size());
  for (const auto& q : points) {
    const double n = q.n_spins;
    const double s = std::pow(n, -amp);
    out.push_back({q.n_spins, q.u * std::pow(n, -1.0 / p.nu) + center_for(q.n_spins, p, centers),
                   q.v * s, q.dv * s});
  }
  return out;
}

double collapse_quality(std::vector<ScaledPoint> points) {
  std::set<int> sizes;
  for (const auto& q : points) sizes.insert(q.n_spins);
  if (sizes.size() < 3) throw std::invalid_argument("collapse_quality: need at least 3 sizes");

  const auto key = [](const ScaledPoint& q) { return std::tie(q.n_spins, q.u, q.v, q.dv); };
  std::sort(points.begin(), points.end(),
            [&](const ScaledPoint& a, const ScaledPoint& b) { return key(a) < key(b); });

  std::vector<std::pair<double, std::size_t>> dist;
  double total = 0.0;
  std::size_t predicted = 0;
  for (const auto& q : points) {
    dist.clear();
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (points[j].n_spins != q.n_spins) dist.emplace_back(std::abs(points[j].u - q.u), j);
    }
    if (dist.size() < 2) continue;
    const std::size_t k = std::min<std::size_t>(kCollapseWindow, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    double sw = 0, swx = 0, swxx = 0, swy = 0, swxy = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const ScaledPoint& f = points[dist[i].second];
      lo = std::min(lo, f.u);
      hi = std::max(hi, f.u);
      const double w = 1.0 / (f.dv * f.dv);
      const double x = f.u - q.u;
      sw += w;
      swx += w * x;
      swxx += w * x * x;
      swy += w * f.v;
      swxy += w * x * f.v;
    }
    if (lo > q.u || hi < q.u) continue;
    const double det = sw * swxx - swx * swx;
    if (!(det > 0.0)) continue;
    const double predicted_v = (swxx * swy - swx * swxy) / det;
    const double var = swxx / det;
    total += (q.v - predicted_v) * (q.v - predicted_v) / (q.dv * q.dv + var);
    ++predicted;
  }
  if (predicted < 3) throw FitError("collapse_quality: insufficient overlap between sizes in u");
  return total / static_cast<double>(predicted);
}

namespace {

constexpr double kPenalty = 1e12;

struct CollapseProblem {
  ScalingDataset data;
  ScalingParams lower, upper;
  bool fixed_center = false;
  double fixed_omega_c = 0.0;

  ScalingParams unpack(const gsl_vector* v) const {
    if (fixed_center) return {fixed_omega_c, gsl_vector_get(v, 0), gsl_vector_get(v, 1)};
    return {gsl_vector_get(v, 0), gsl_vector_get(v, 1), gsl_vector_get(v, 2)};
  }

  double quality(const ScalingParams& p) const {
    double excess = 0.0;
    const auto out = [&](double x, double lo, double hi) {
      if (x < lo) excess += lo - x;
      if (x > hi) excess += x - hi;
    };
    if (!fixed_center) out(p.omega_c, lower.omega_c, upper.omega_c);
    out(p.nu, lower.nu, upper.nu);
    out(p.shape, lower.shape, upper.shape);
    if (excess > 0.0 || !(p.nu > 0.0)) return kPenalty * (1.0 + excess);
    try {
      return collapse_quality(scale_dataset(data, p));
    } catch (const FitError&) {
      return kPenalty;
    }
  }
};

double objective(const gsl_vector* v, void* raw) {
  const auto* prob = static_cast<const CollapseProblem*>(raw);
  return prob->quality(prob->unpack(v));
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
using VectorPtr = std::unique_ptr<gsl_vector, VectorDeleter>;

VectorPtr make_vector(const std::vector<double>& values) {
  VectorPtr v(gsl_vector_alloc(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) gsl_vector_set(v.get(), i, values[i]);
  return v;
}

struct SimplexResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
};

SimplexResult nelder_mead(const CollapseProblem& prob, const std::vector<double>& start,
                          const std::vector<double>& steps, const CollapseOptions& opt) {
  const std::size_t dim = start.size();
  gsl_multimin_function fn{objective, dim, const_cast<CollapseProblem*>(&prob)};
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim));
  VectorPtr x = make_vector(start);
  VectorPtr s = make_vector(steps);
  gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), s.get());

  int iter = 0;
  int status = GSL_CONTINUE;
  while (status == GSL_CONTINUE && iter < opt.max_iterations) {
    ++iter;
    if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), opt.tolerance);
  }
  if (status != GSL_SUCCESS) {
    throw FitError("fit_collapse: simplex did not converge after " + std::to_string(iter) +
                   " iterations (size " + std::to_string(gsl_multimin_fminimizer_size(m.get())) +
                   ")");
  }
  SimplexResult r;
  for (std::size_t i = 0; i < dim; ++i) r.x.push_back(gsl_vector_get(m->x, i));
  r.f = m->fval;
  r.iterations = iter;
  return r;
}

// Distance along one axis at which quality first exceeds target, capped at `limit`.
double crossing(const std::function<double(double)>& q, double target, double step,
                double limit) {
  double inside = 0.0;
  double t = std::min(step, limit);
  while (q(t) < target) {
    inside = t;
    if (t >= limit) return limit;
    t = std::min(2.0 * t, limit);
  }
  double outside = t;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (inside + outside);
    (q(mid) < target ? inside : outside) = mid;
  }
  return 0.5 * (inside + outside);
}

}  // namespace

CollapseFit fit_collapse(const ScalingDataset& data, const ScalingParams& initial_guess,
                         const ScalingParams& lower, const ScalingParams& upper,
                         const CollapseOptions& options) {
  detail::quiet_gsl();
  data.validate();
  CollapseProblem prob;
  prob.data.kind = data.kind;
  prob.data.centers = data.centers;
  for (const auto& r : data.records) {
    if (r.x >= options.x_min && r.x <= options.x_max) prob.data.records.push_back(r);
  }
  if (prob.data.sizes().size() < 4) {
    throw std::invalid_argument("fit_collapse: need at least 4 sizes inside the fit window");
  }
  if (!(lower.nu > 0.0) || lower.nu > upper.nu || lower.shape > upper.shape ||
      lower.omega_c > upper.omega_c) {
    throw std::invalid_argument("fit_collapse: inconsistent bounds");
  }
  prob.lower = lower;
  prob.upper = upper;
  prob.fixed_center = !data.centers.empty();
  prob.fixed_omega_c = initial_guess.omega_c;

  std::vector<double> start, steps;
  if (!prob.fixed_center) {
    start.push_back(initial_guess.omega_c);
    steps.push_back(options.initial_step.omega_c);
  }
  start.insert(start.end(), {initial_guess.nu, initial_guess.shape});
  steps.insert(steps.end(), {options.initial_step.nu, options.initial_step.shape});

  SimplexResult first = nelder_mead(prob, start, steps, options);
  SimplexResult second = nelder_mead(prob, first.x, steps, options);
  const SimplexResult& best = second.f <= first.f ? second : first;

  VectorPtr xv = make_vector(best.x);
  const ScalingParams p = prob.unpack(xv.get());
  CollapseFit fit;
  fit.kind = data.kind;
  fit.omega_c = p.omega_c;
  fit.nu = p.nu;
  fit.shape_exponent = p.shape;
  fit.quality = best.f;
  fit.iterations = first.iterations + second.iterations;
  fit.points = prob.data.records.size();
  fit.centered_per_size = prob.fixed_center;
  if (!(fit.quality < kPenalty)) throw FitError("fit_collapse: no admissible collapse found");

  const double target = fit.quality + 1.0;
  const auto half_width = [&](double ScalingParams::*field, double lo, double hi, double step) {
    const auto along = [&](double sign) {
      return [&, sign](double t) {
        ScalingParams q = p;
        q.*field += sign * t;
        return prob.quality(q);
      };
    };
    const double up = crossing(along(+1.0), target, step, hi - p.*field);
    const double down = crossing(along(-1.0), target, step, p.*field - lo);
    return 0.5 * (up + down);
  };
  if (!prob.fixed_center) {
    fit.uncertainty.omega_c = half_width(&ScalingParams::omega_c, lower.omega_c, upper.omega_c,
                                         1e-2 * options.initial_step.omega_c);
  } else {
    fit.uncertainty.omega_c = 0.0;
  }
  fit.uncertainty.nu = half_width(&ScalingParams::nu, lower.nu, upper.nu, 1e-2 * options.initial_step.nu);
  fit.uncertainty.shape =
      half_width(&ScalingParams::shape, lower.shape, upper.shape, 1e-2 * options.initial_step.shape);

  const auto pinned = [](double x, double lo, double hi) {
    const double margin = 1e-3 * (hi - lo);
    return x - lo <= margin || hi - x <= margin;
  };
  fit.pinned = {!prob.fixed_center && pinned(p.omega_c, lower.omega_c, upper.omega_c),
                pinned(p.nu, lower.nu, upper.nu), pinned(p.shape, lower.shape, upper.shape)};
  return fit;
}

Peak find_peak(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("find_peak: length mismatch");
  if (x.size() < 3) throw std::invalid_argument("find_peak: need at least 3 points");
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw std::invalid_argument("find_peak: x must be strictly increasing");
  }
  const std::size_t i = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  if (i == 0 || i + 1 == x.size()) return {x[i], y[i], false};

  const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
  const double f0 = y[i - 1], f1 = y[i], f2 = y[i + 1];
  const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
  const double a = (x2 * (f1 - f0) + x1 * (f0 - f2) + x0 * (f2 - f1)) / denom;
  const double b = (x2 * x2 * (f0 - f1) + x1 * x1 * (f2 - f0) + x0 * x0 * (f1 - f2)) / denom;
  const double c = f0 - a * x0 * x0 - b * x0;
  if (!(a < 0.0)) return {x1, f1, true};
  const double xv = std::clamp(-b / (2.0 * a), x0, x2);
  return {xv, a * xv * xv + b * xv + c, true};
}

ConsistencyReport check_exponent_consistency(const PowerLawFit& peak_fit,
                                             const CollapseFit& collapse) {
  ConsistencyReport r;
  r.b = peak_fit.parameter("b");
  r.b_error = peak_fit.error("b");
  const double eta = collapse.shape_exponent;
  const double nu = collapse.nu;
  r.eta_over_nu = eta / nu;
  r.eta_over_nu_error = std::hypot(collapse.uncertainty.shape / nu,
                                   eta * collapse.uncertainty.nu / (nu * nu));
  r.difference = std::abs(r.b - r.eta_over_nu);
  r.combined_error = std::hypot(r.b_error, r.eta_over_nu_error);
  r.consistent = r.difference <= r.combined_error;
  return r;
}

}  // namespace btc
