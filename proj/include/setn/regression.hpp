#pragma once

#include <cstddef>
#include <span>

namespace setn {

// Ordinary least squares y = intercept + slope x with the usual normal-error covariance.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double se_intercept = 0.0;
  double se_slope = 0.0;
  double sigma2 = 0.0;  // residual variance, n - 2 degrees of freedom
  std::size_t n = 0;
  double x_mean = 0.0;
  double sxx = 0.0;

  double predict(double x) const { return intercept + slope * x; }
  // Half width of the two-sided confidence interval of the mean response at x.
  double mean_band(double x, double level) const;
  // Half width of the two-sided confidence interval of the slope.
  double slope_band(double level) const;
};

// Needs at least three points with distinct x.
LinearFit ols(std::span<const double> x, std::span<const double> y);

// Two-sided Student-t critical value for confidence `level` and `dof` degrees of freedom.
double t_critical(double level, double dof);

}  // namespace setn
