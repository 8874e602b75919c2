#include "setn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "setn/errors.hpp"

namespace setn {

LambdaFit extract_lambda(std::span<const SffSeries> series) {
  if (series.size() < 3) throw EstimationError("extract_lambda: need at least three sizes");
  const auto& grid = series.front().times;
  for (const auto& s : series) {
    if (s.times.size() != grid.size() || s.values.size() != grid.size())
      throw DimensionError("extract_lambda: series do not share a time grid");
    for (std::size_t k = 0; k < grid.size(); ++k)
      if (std::abs(s.times[k] - grid[k]) > 1e-9 * std::max(1.0, std::abs(grid[k])))
        throw DimensionError("extract_lambda: series do not share a time grid");
  }
  LambdaFit out;
  out.times = grid;
  for (const auto& s : series) out.sizes.push_back(s.L);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::vector<double> x, y;
    for (const auto& s : series) {
      if (s.values[k] > 0.0 && std::isfinite(s.values[k])) {
        x.push_back(s.L);
        y.push_back(std::log(s.values[k]));
      } else {
        out.flags.push_back("L=" + std::to_string(s.L) + " t=" + std::to_string(grid[k]) + ": non-positive K excluded");
      }
    }
    out.n_sizes.push_back(x.size());
    if (x.size() < 3) {
      out.lambda.push_back(nan);
      out.ci80_low.push_back(nan);
      out.ci80_high.push_back(nan);
      out.log_intercept.push_back(nan);
      continue;
    }
    const LinearFit f = ols(x, y);
    const double band = f.slope_band(0.80);
    out.lambda.push_back(std::exp(f.slope));
    out.ci80_low.push_back(std::exp(f.slope - band));
    out.ci80_high.push_back(std::exp(f.slope + band));
    out.log_intercept.push_back(f.intercept);
  }
  return out;
}

ThoulessEstimate thouless_estimate(const SffSeries& series, double window_lo, double window_hi, double level) {
  const auto& t = series.times;
  const auto& k = series.values;
  if (t.size() != k.size() || t.size() < 3) throw DimensionError("thouless_estimate: malformed series");
  if (!(window_lo < window_hi)) throw ConfigError("thouless_estimate: empty fit window");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= window_lo && t[i] <= window_hi) {
      x.push_back(t[i]);
      y.push_back(k[i]);
    }
  if (x.size() < 3 || t.front() > window_lo || t.back() < window_hi)
    throw EstimationError("thouless_estimate: series does not cover the fit window");
  ThoulessEstimate out;
  out.fit = ols(x, y);

  std::size_t start = 0;
  while (start + 1 < t.size() && k[start + 1] < k[start]) ++start;
  std::size_t stop = 0;
  while (stop < t.size() && t[stop] < window_lo) ++stop;
  if (start >= stop) throw EstimationError("thouless_estimate: no peak before the fit window");

  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  const double tol = 1e-9 * scale;
  std::size_t peak = start;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = start; i < stop; ++i) {
    const double excess = k[i] - out.fit.predict(t[i]);
    if (excess > best + tol) {
      best = excess;
      peak = i;
    }
  }
  if (best <= tol) peak = start;
  out.peak_time = t[peak];
  for (std::size_t i = peak; i < t.size(); ++i) {
    const double upper = out.fit.predict(t[i]) + out.fit.mean_band(t[i], level);
    if (k[i] <= upper + tol) {
      out.t_th = t[i];
      const double left = i > 0 ? t[i] - t[i - 1] : 0.0;
      const double right = i + 1 < t.size() ? t[i + 1] - t[i] : 0.0;
      out.uncertainty = std::max(left, right);
      return out;
    }
  }
  throw EstimationError("thouless_estimate: K never meets the fit band after the peak");
}

std::vector<double> toy_lambdas(int t) {
  if (t < 0) throw ConfigError("toy model: time must be non-negative");
  std::vector<double> lam(static_cast<std::size_t>(t) + 1);
  lam[0] = 1.0;
  for (int i = 1; i <= t; ++i) lam[static_cast<std::size_t>(i)] = 1.0 - std::pow(0.99, t - i);
  return lam;
}

double toy_model_value(int t, int L) {
  if (L < 1) throw ConfigError("toy model: L must be at least 1");
  double k = 0.0;
  for (double l : toy_lambdas(t)) k += std::pow(l, L);
  return k;
}

SffSeries toy_model_sff(int t_max, int L) {
  if (t_max < 0) throw ConfigError("toy model: t_max must be non-negative");
  SffSeries out;
  out.L = L;
  out.method = "toy";
  for (int t = 0; t <= t_max; ++t) {
    out.times.push_back(t);
    out.values.push_back(toy_model_value(t, L));
  }
  return out;
}

int toy_dominance_time(int L, double threshold) {
  if (L < 1) throw ConfigError("toy model: L must be at least 1");
  if (!(threshold >= 0.0)) throw ConfigError("toy model: threshold must be non-negative");
  // The subleading sum at time t is sum_{k=0}^{t-1} (1 - 0.99^k)^L.
  double sum = 0.0;
  constexpr int kMaxTime = 10000000;
  for (int t = 1; t <= kMaxTime; ++t) {
    sum += std::pow(1.0 - std::pow(0.99, t - 1), L);
    if (sum > threshold) return t;
  }
  throw EstimationError("toy_dominance_time: threshold not reached");
}

}  // namespace setn
