#pragma once

#include <span>
#include <string>
#include <vector>

#include "setn/regression.hpp"
#include "setn/sff.hpp"

namespace setn {

// Per time: log K(L, t) = log A(t) + L log lambda(t), fitted over the available sizes.
struct LambdaFit {
  std::vector<double> times;
  std::vector<double> lambda;     // NaN where fewer than three sizes had K > 0
  std::vector<double> ci80_low;
  std::vector<double> ci80_high;
  std::vector<double> log_intercept;
  std::vector<std::size_t> n_sizes;
  std::vector<int> sizes;
  std::vector<std::string> flags;  // excluded (L, t) points
};

LambdaFit extract_lambda(std::span<const SffSeries> series);

struct ThoulessEstimate {
  double t_th = 0.0;
  double uncertainty = 0.0;  // grid spacing at t_th
  double peak_time = 0.0;
  LinearFit fit;
};

inline constexpr double kThoulessWindowLo = 20.0;
inline constexpr double kThoulessWindowHi = 90.0;

// Linear fit of K over the window with a confidence band of the mean response. The peak is
// the largest excess of K over the fitted line between the end of the initial decay and the
// window start; t_Th is the first grid time from the peak on where K is at or below the
// upper band.
ThoulessEstimate thouless_estimate(const SffSeries& series, double window_lo = kThoulessWindowLo,
                                   double window_hi = kThoulessWindowHi, double level = 0.95);

// lambda_0 = 1, lambda_i = 1 - 0.99^(t - i) for 0 < i <= t.
std::vector<double> toy_lambdas(int t);
double toy_model_value(int t, int L);
SffSeries toy_model_sff(int t_max, int L);

inline constexpr double kToyDominanceThreshold = 0.1;
// Smallest integer t with sum_{i >= 1} lambda_i(t)^L > threshold.
int toy_dominance_time(int L, double threshold = kToyDominanceThreshold);

}  // namespace setn
