#include "setn/regression.hpp"

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "setn/errors.hpp"

namespace setn {

double t_critical(double level, double dof) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
  if (!(dof > 0.0)) throw EstimationError("no degrees of freedom left for a confidence band");
  const boost::math::students_t dist(dof);
  return boost::math::quantile(dist, 0.5 + 0.5 * level);
}

LinearFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("ols: x and y lengths differ");
  if (x.size() < 3) throw EstimationError("ols: need at least three points");
  LinearFit f;
  f.n = x.size();
  const double n = static_cast<double>(f.n);
  double ym = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) {
    f.x_mean += x[i];
    ym += y[i];
  }
  f.x_mean /= n;
  ym /= n;
  double sxy = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) {
    f.sxx += (x[i] - f.x_mean) * (x[i] - f.x_mean);
    sxy += (x[i] - f.x_mean) * (y[i] - ym);
  }
  if (!(f.sxx > 0.0)) throw EstimationError("ols: x values are all equal");
  f.slope = sxy / f.sxx;
  f.intercept = ym - f.slope * f.x_mean;
  double rss = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) {
    const double r = y[i] - f.predict(x[i]);
    rss += r * r;
  }
  f.sigma2 = rss / (n - 2.0);
  f.se_slope = std::sqrt(f.sigma2 / f.sxx);
  f.se_intercept = std::sqrt(f.sigma2 * (1.0 / n + f.x_mean * f.x_mean / f.sxx));
  return f;
}

double LinearFit::mean_band(double x, double level) const {
  const double se = std::sqrt(sigma2 * (1.0 / static_cast<double>(n) + (x - x_mean) * (x - x_mean) / sxx));
  return t_critical(level, static_cast<double>(n) - 2.0) * se;
}

double LinearFit::slope_band(double level) const {
  return t_critical(level, static_cast<double>(n) - 2.0) * se_slope;
}

}  // namespace setn
