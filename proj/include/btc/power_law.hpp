// power_law.hpp: least-squares fits of N-dependence.

#pragma once

#include "btc/types.hpp"

#include <string>
#include <vector>

namespace btc {

enum class PowerLawModel {
  powerlaw,  // a N^b, fitted in log-log
  pareto,    // kappa (1 - N^{-c})
  offset,    // a' N^{-b'} + c'
};

PowerLawModel parse_power_law_model(const std::string& label);
std::string to_string(PowerLawModel model);

struct PowerLawFit {
  PowerLawModel model = PowerLawModel::powerlaw;
  std::vector<std::string> names;  // parameter names in model order
  std::vector<double> values;
  std::vector<double> errors;      // standard errors from the fit covariance
  double r_squared = 0.0;          // in [0, 1]; log space for the powerlaw model
  std::vector<double> residuals;   // y - model(N)
  double kappa = 1.0;              // pareto only

  double parameter(const std::string& name) const;
  double error(const std::string& name) const;
  double predict(double n) const;
};

/// Fits ys(ns) to the model. FitError for fewer than 4 points, non-positive
/// inputs to the log-log model, a singular design or a solver failure.
PowerLawFit fit_power_law(const std::vector<double>& ns, const std::vector<double>& ys,
                          PowerLawModel model, double kappa = 1.0);

}  // namespace btc
