#include "setn/disorder.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "setn/errors.hpp"

namespace setn {

std::string to_string(DisorderKind kind) { return kind == DisorderKind::Uniform ? "uniform" : "gaussian"; }

DisorderKind parse_disorder_kind(const std::string& text) {
  if (text == "uniform") return DisorderKind::Uniform;
  if (text == "gaussian") return DisorderKind::Gaussian;
  throw ConfigError("unknown disorder kind '" + text + "' (expected uniform or gaussian)");
}

void DisorderSpec::validate() const {
  if (!(strength >= 0.0) || !std::isfinite(strength))
    throw ConfigError("disorder strength must be finite and non-negative");
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t task) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(task), static_cast<std::uint32_t>(task >> 32)};
  engine_.seed(seq);
}

std::uint64_t RandomStream::next_u64() { return engine_(); }

double RandomStream::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RandomStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double RandomStream::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  while (u1 == 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

double RandomStream::draw(const DisorderSpec& spec) {
  if (spec.kind == DisorderKind::Uniform) return uniform(-spec.strength, spec.strength);
  return spec.strength * normal();
}

RealizationBatch sample(const DisorderSpec& spec, std::size_t m, std::uint64_t seed) {
  spec.validate();
  if (m < 1) throw ConfigError("sample: realization count must be at least 1");
  RealizationBatch batch;
  batch.seed = seed;
  batch.spec = spec;
  batch.values.resize(m);
  for (std::size_t start = 0, chunk = 0; start < m; start += kSampleChunk, ++chunk) {
    RandomStream rng(seed, chunk);
    const std::size_t end = std::min(m, start + kSampleChunk);
    for (std::size_t j = start; j < end; ++j) batch.values[j] = rng.draw(spec);
  }
  return batch;
}

std::array<cplx, 2> phase_vector(double h, double tau) {
  return {std::polar(1.0, -tau * h), std::polar(1.0, tau * h)};
}

double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

double characteristic(const DisorderSpec& spec, double tau, double delta) {
  if (spec.kind == DisorderKind::Uniform) return sinc(tau * spec.strength * delta);
  const double a = spec.strength * tau * delta;
  return std::exp(-0.5 * a * a);
}

double analytic_o_entry(const SignVector& sp, const SignVector& s, const DisorderSpec& spec, double tau) {
  if (sp.size() != s.size()) throw DimensionError("analytic_o_entry: sign vectors differ in length");
  int delta = 0;
  for (std::size_t p = 0; p < s.size(); ++p) delta += sp[p] - s[p];
  return characteristic(spec, tau, delta);
}

SignVector signs_from_index(std::uint64_t index, int n) {
  SignVector s(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) s[static_cast<std::size_t>(p)] = ((index >> (n - 1 - p)) & 1U) ? -1 : 1;
  return s;
}

namespace {

void check_dense_steps(int n) {
  if (n < 1) throw ConfigError("dense O matrix needs n >= 1");
  if (n > kMaxDenseOSteps) throw ResourceError("dense O matrix limited to n <= 12 steps");
}

// Sum of sign labels for a configuration index: n - 2 * popcount.
int sign_sum(std::uint64_t index, int n) { return n - 2 * std::popcount(index); }

}  // namespace

Eigen::MatrixXd dense_o_matrix(int n, const DisorderSpec& spec, double tau) {
  check_dense_steps(n);
  spec.validate();
  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> by_delta(4 * static_cast<std::size_t>(n) + 1);
  for (int d = -2 * n; d <= 2 * n; ++d) by_delta[static_cast<std::size_t>(d + 2 * n)] = characteristic(spec, tau, d);
  Eigen::MatrixXd o(dim, dim);
  for (std::size_t lp = 0; lp < dim; ++lp)
    for (std::size_t l = 0; l < dim; ++l) {
      const int d = sign_sum(lp, n) - sign_sum(l, n);
      o(static_cast<Eigen::Index>(lp), static_cast<Eigen::Index>(l)) = by_delta[static_cast<std::size_t>(d + 2 * n)];
    }
  return o;
}

Eigen::MatrixXcd monte_carlo_o(int n, const RealizationBatch& batch, double tau) {
  check_dense_steps(n);
  if (batch.values.empty()) throw ConfigError("monte_carlo_o: empty batch");
  const double inv_m = 1.0 / static_cast<double>(batch.values.size());
  std::vector<cplx> by_delta(4 * static_cast<std::size_t>(n) + 1);
  for (int d = -2 * n; d <= 2 * n; ++d) {
    cplx acc = 0.0;
    for (double h : batch.values) acc += std::polar(1.0, tau * h * d);
    by_delta[static_cast<std::size_t>(d + 2 * n)] = acc * inv_m;
  }
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXcd o(dim, dim);
  for (std::size_t lp = 0; lp < dim; ++lp)
    for (std::size_t l = 0; l < dim; ++l) {
      const int d = sign_sum(lp, n) - sign_sum(l, n);
      o(static_cast<Eigen::Index>(lp), static_cast<Eigen::Index>(l)) = by_delta[static_cast<std::size_t>(d + 2 * n)];
    }
  return o;
}

}  // namespace setn
