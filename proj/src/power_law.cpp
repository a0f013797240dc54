#include "btc/power_law.hpp"

#include "gsl_support.hpp"

#include <gsl/gsl_blas.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_fit.h>
#include <gsl/gsl_multifit_nlinear.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <set>

namespace btc {

PowerLawModel parse_power_law_model(const std::string& label) {
  if (label == "powerlaw") return PowerLawModel::powerlaw;
  if (label == "pareto") return PowerLawModel::pareto;
  if (label == "offset") return PowerLawModel::offset;
  throw std::invalid_argument("unknown fit model '" + label + "' (powerlaw, pareto, offset)");
}

std::string to_string(PowerLawModel model) {
  switch (model) {
    case PowerLawModel::powerlaw: return "powerlaw";
    case PowerLawModel::pareto: return "pareto";
    case PowerLawModel::offset: return "offset";
  }
  return "?";
}

double PowerLawFit::parameter(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  throw std::out_of_range("no parameter '" + name + "' in " + to_string(model) + " fit");
}

double PowerLawFit::error(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return errors[i];
  }
  throw std::out_of_range("no parameter '" + name + "' in " + to_string(model) + " fit");
}

double PowerLawFit::predict(double n) const {
  switch (model) {
    case PowerLawModel::powerlaw: return values[0] * std::pow(n, values[1]);
    case PowerLawModel::pareto: return kappa * (1.0 - std::pow(n, -values[0]));
    case PowerLawModel::offset: return values[0] * std::pow(n, -values[1]) + values[2];
  }
  return 0.0;
}

namespace {

double r_squared(const std::vector<double>& y, const std::vector<double>& fitted) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - fitted[i]) * (y[i] - fitted[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
}

struct LogLinear {
  double intercept, slope, var_intercept, var_slope;
};

LogLinear log_log(const std::vector<double>& ns, const std::vector<double>& ys) {
  std::vector<double> lx(ns.size()), ly(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    lx[i] = std::log(ns[i]);
    ly[i] = std::log(ys[i]);
  }
  LogLinear r{};
  double cov01 = 0.0, sumsq = 0.0;
  const int status = gsl_fit_linear(lx.data(), 1, ly.data(), 1, lx.size(), &r.intercept, &r.slope,
                                    &r.var_intercept, &cov01, &r.var_slope, &sumsq);
  if (status != GSL_SUCCESS || !std::isfinite(r.slope)) throw FitError("log-log fit failed");
  return r;
}

// --- nonlinear models ---------------------------------------------------------

struct NlData {
  const std::vector<double>* ns;
  const std::vector<double>* ys;
  PowerLawModel model;
  double kappa;
};

int nl_f(const gsl_vector* p, void* raw, gsl_vector* f) {
  const auto* d = static_cast<const NlData*>(raw);
  for (std::size_t i = 0; i < d->ns->size(); ++i) {
    const double n = (*d->ns)[i];
    double model = 0.0;
    if (d->model == PowerLawModel::pareto) {
      model = d->kappa * (1.0 - std::pow(n, -gsl_vector_get(p, 0)));
    } else {
      model = gsl_vector_get(p, 0) * std::pow(n, -gsl_vector_get(p, 1)) + gsl_vector_get(p, 2);
    }
    gsl_vector_set(f, i, model - (*d->ys)[i]);
  }
  return GSL_SUCCESS;
}

int nl_df(const gsl_vector* p, void* raw, gsl_matrix* jac) {
  const auto* d = static_cast<const NlData*>(raw);
  for (std::size_t i = 0; i < d->ns->size(); ++i) {
    const double n = (*d->ns)[i];
    const double ln = std::log(n);
    if (d->model == PowerLawModel::pareto) {
      const double c = gsl_vector_get(p, 0);
      gsl_matrix_set(jac, i, 0, d->kappa * ln * std::pow(n, -c));
    } else {
      const double a = gsl_vector_get(p, 0);
      const double b = gsl_vector_get(p, 1);
      const double nb = std::pow(n, -b);
      gsl_matrix_set(jac, i, 0, nb);
      gsl_matrix_set(jac, i, 1, -a * ln * nb);
      gsl_matrix_set(jac, i, 2, 1.0);
    }
  }
  return GSL_SUCCESS;
}

struct NlResult {
  std::vector<double> values;
  std::vector<double> errors;
  double chisq = 0.0;
};

struct WorkspaceDeleter {
  void operator()(gsl_multifit_nlinear_workspace* w) const { gsl_multifit_nlinear_free(w); }
};

NlResult levenberg_marquardt(NlData data, const std::vector<double>& start) {
  const std::size_t n = data.ns->size();
  const std::size_t p = start.size();
  gsl_multifit_nlinear_fdf fdf{};
  fdf.f = nl_f;
  fdf.df = nl_df;
  fdf.n = n;
  fdf.p = p;
  fdf.params = &data;
  gsl_multifit_nlinear_parameters params = gsl_multifit_nlinear_default_parameters();
  params.trs = gsl_multifit_nlinear_trs_lm;
  std::unique_ptr<gsl_multifit_nlinear_workspace, WorkspaceDeleter> w(
      gsl_multifit_nlinear_alloc(gsl_multifit_nlinear_trust, &params, n, p));

  gsl_vector_view x0 = gsl_vector_view_array(const_cast<double*>(start.data()), p);
  gsl_multifit_nlinear_init(&x0.vector, &fdf, w.get());
  int info = 0;
  const int status = gsl_multifit_nlinear_driver(500, 1e-15, 1e-15, 1e-15, nullptr, nullptr,
                                                 &info, w.get());
  if (status != GSL_SUCCESS && status != GSL_ENOPROG) {
    throw FitError(std::string("nonlinear fit failed: ") + gsl_strerror(status));
  }
  NlResult r;
  const gsl_vector* x = gsl_multifit_nlinear_position(w.get());
  const gsl_vector* resid = gsl_multifit_nlinear_residual(w.get());
  gsl_blas_ddot(resid, resid, &r.chisq);
  gsl_matrix* jac = gsl_multifit_nlinear_jac(w.get());
  std::unique_ptr<gsl_matrix, decltype(&gsl_matrix_free)> covar(gsl_matrix_alloc(p, p),
                                                               gsl_matrix_free);
  if (gsl_multifit_nlinear_covar(jac, 0.0, covar.get()) != GSL_SUCCESS) {
    throw FitError("nonlinear fit: singular design");
  }
  const double dof = static_cast<double>(n - p);
  const double s2 = dof > 0 ? r.chisq / dof : 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double var = gsl_matrix_get(covar.get(), i, i);
    if (!std::isfinite(var)) throw FitError("nonlinear fit: singular design");
    r.values.push_back(gsl_vector_get(x, i));
    r.errors.push_back(std::sqrt(std::max(0.0, var * s2)));
  }
  return r;
}

}  // namespace

PowerLawFit fit_power_law(const std::vector<double>& ns, const std::vector<double>& ys,
                          PowerLawModel model, double kappa) {
  detail::quiet_gsl();
  if (ns.size() != ys.size()) throw FitError("fit_power_law: size mismatch");
  if (ns.size() < 4) throw FitError("fit_power_law: need at least 4 points");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!std::isfinite(ns[i]) || !std::isfinite(ys[i])) {
      throw FitError("fit_power_law: non-finite input");
    }
    if (!(ns[i] > 0.0)) throw FitError("fit_power_law: N must be positive");
  }
  const std::set<double> distinct(ns.begin(), ns.end());
  const std::size_t n_params = model == PowerLawModel::offset ? 3 : model == PowerLawModel::pareto ? 1 : 2;
  if (distinct.size() < n_params + 1) throw FitError("fit_power_law: singular design");
  if (model == PowerLawModel::pareto && !(kappa > 0.0)) throw FitError("fit_power_law: kappa must be > 0");

  PowerLawFit fit;
  fit.model = model;
  fit.kappa = kappa;

  if (model == PowerLawModel::powerlaw) {
    for (double y : ys) {
      if (!(y > 0.0)) throw FitError("fit_power_law: log-log model needs positive ys");
    }
    const LogLinear r = log_log(ns, ys);
    const double a = std::exp(r.intercept);
    fit.names = {"a", "b"};
    fit.values = {a, r.slope};
    fit.errors = {a * std::sqrt(r.var_intercept), std::sqrt(r.var_slope)};
    std::vector<double> ly(ys.size()), fitted(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
      ly[i] = std::log(ys[i]);
      fitted[i] = r.intercept + r.slope * std::log(ns[i]);
    }
    fit.r_squared = r_squared(ly, fitted);
  } else {
    NlData data{&ns, &ys, model, kappa};
    std::vector<std::vector<double>> starts;
    if (model == PowerLawModel::pareto) {
      fit.names = {"c"};
      // log(1 - y/kappa) = -c log N where the data allow it.
      std::vector<double> gn, gy;
      for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ys[i] < kappa && ns[i] > 1.0) {
          gn.push_back(ns[i]);
          gy.push_back(1.0 - ys[i] / kappa);
        }
      }
      double c0 = 0.5;
      if (gn.size() >= 2 && std::set<double>(gn.begin(), gn.end()).size() >= 2) {
        c0 = -log_log(gn, gy).slope;
      }
      starts = {{c0}, {0.5}, {1.0}};
    } else {
      fit.names = {"a", "b", "c"};
      for (double b0 : {0.25, 0.5, 1.0, 2.0}) {
        // Linear least squares for (a, c) at fixed b gives a sensible start.
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double m = static_cast<double>(ns.size());
        for (std::size_t i = 0; i < ns.size(); ++i) {
          const double t = std::pow(ns[i], -b0);
          sx += t;
          sy += ys[i];
          sxx += t * t;
          sxy += t * ys[i];
        }
        const double det = m * sxx - sx * sx;
        const double a0 = det != 0.0 ? (m * sxy - sx * sy) / det : 1.0;
        const double c0 = (sy - a0 * sx) / m;
        starts.push_back({a0, b0, c0});
      }
    }
    std::optional<NlResult> best;
    std::string last_error = "no start converged";
    for (const auto& s : starts) {
      try {
        NlResult r = levenberg_marquardt(data, s);
        if (!best || r.chisq < best->chisq) best = std::move(r);
      } catch (const FitError& e) {
        last_error = e.what();
      }
    }
    if (!best) throw FitError("fit_power_law: " + last_error);
    fit.values = best->values;
    fit.errors = best->errors;
  }

  std::vector<double> fitted(ys.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    fitted[i] = fit.predict(ns[i]);
    fit.residuals.push_back(ys[i] - fitted[i]);
  }
  if (model != PowerLawModel::powerlaw) fit.r_squared = r_squared(ys, fitted);
  for (double v : fit.values) {
    if (!std::isfinite(v)) throw FitError("fit_power_law: non-finite parameters");
  }
  return fit;
}

}  // namespace btc
