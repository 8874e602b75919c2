#include "setn/ed.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <cmath>
#include <numbers>
#include <thread>

#include <Eigen/Eigenvalues>

#include "setn/errors.hpp"
#include "setn/quadrature.hpp"

namespace setn {

namespace {

std::atomic<std::uint64_t> g_diagonalizations{0};

bool uniform_grid(std::span<const double> t) {
  if (t.size() < 3) return false;
  const double dt = t[1] - t[0];
  if (!(dt > 0.0)) return false;
  for (std::size_t k = 2; k < t.size(); ++k)
    if (std::abs(t[k] - (t[0] + static_cast<double>(k) * dt)) > 1e-9 * std::max(1.0, std::abs(t[k]))) return false;
  return true;
}

// out[k] += weight * |sum_e exp(-i e t_k)|^2
void accumulate_sff(const Eigen::VectorXd& e, std::span<const double> times, double weight, std::vector<double>& out) {
  const Eigen::Index d = e.size();
  if (!uniform_grid(times)) {
    for (std::size_t k = 0; k < times.size(); ++k) {
      cplx tr = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) tr += std::polar(1.0, -e(i) * times[k]);
      out[k] += weight * std::norm(tr);
    }
    return;
  }
  constexpr std::size_t kReseed = 64;
  const double dt = times[1] - times[0];
  Eigen::VectorXcd step(d), phase(d);
  for (Eigen::Index i = 0; i < d; ++i) step(i) = std::polar(1.0, -e(i) * dt);
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (k % kReseed == 0) {
      for (Eigen::Index i = 0; i < d; ++i) phase(i) = std::polar(1.0, -e(i) * times[k]);
    } else {
      phase = phase.cwiseProduct(step);
    }
    out[k] += weight * std::norm(phase.sum());
  }
}

template <class F>
void run_workers(F& worker, int requested, std::size_t tasks) {
  int threads = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), tasks));
  if (threads <= 1) {
    worker();
    return;
  }
  std::exception_ptr failure;
  std::mutex guard;
  auto guarded = [&]() {
    try {
      worker();
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!failure) failure = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < threads; ++i) pool.emplace_back(guarded);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void check_times(std::span<const double> times) {
  for (double t : times)
    if (!std::isfinite(t) || t < 0.0) throw ConfigError("times must be finite and non-negative");
}

Eigen::MatrixXcd matrix_power(Eigen::MatrixXcd a, int n) {
  Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
  while (n > 0) {
    if (n & 1) result = result * a;
    n >>= 1;
    if (n) a = a * a;
  }
  return result;
}

// Multiplies mode `mode` of an N^L tensor (mode 0 most significant) by mat.
void apply_mode(Eigen::VectorXcd& v, const Eigen::MatrixXcd& mat, int mode, int n, int L) {
  std::size_t stride = 1;
  for (int i = mode + 1; i < L; ++i) stride *= static_cast<std::size_t>(n);
  const std::size_t outer = static_cast<std::size_t>(v.size()) / (stride * static_cast<std::size_t>(n));
  Eigen::VectorXcd buf(n);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < stride; ++i) {
      const std::size_t base = o * static_cast<std::size_t>(n) * stride + i;
      for (int c = 0; c < n; ++c) buf(c) = v(static_cast<Eigen::Index>(base + static_cast<std::size_t>(c) * stride));
      const Eigen::VectorXcd w = mat * buf;
      for (int c = 0; c < n; ++c) v(static_cast<Eigen::Index>(base + static_cast<std::size_t>(c) * stride)) = w(c);
    }
}

// Fourier coefficients A(r) of Tr U^n = sum_r A(r) prod_i exp(-i tau h_i (n - 2 r_i)).
Eigen::VectorXcd trace_harmonics(const ModelParams& params, int n) {
  const int N = n + 1;
  const int L = params.L;
  double work = std::pow(static_cast<double>(N), L);
  if (work > 4.0e6) throw ResourceError("sff_trotter_batch: (n+1)^L sample grid too large");
  const std::size_t total = static_cast<std::size_t>(work);
  Eigen::VectorXcd f(static_cast<Eigen::Index>(total));
  std::vector<double> h(static_cast<std::size_t>(L));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    double shift = 0.0;
    for (int i = L - 1; i >= 0; --i) {
      const int s = static_cast<int>(rest % static_cast<std::size_t>(N));
      rest /= static_cast<std::size_t>(N);
      h[static_cast<std::size_t>(i)] = std::numbers::pi * s / (N * params.tau);
      shift += params.tau * h[static_cast<std::size_t>(i)] * n;
    }
    const cplx tr = matrix_power(trotter_step(params, h), n).trace();
    f(static_cast<Eigen::Index>(idx)) = tr * std::polar(1.0, shift);
  }
  Eigen::MatrixXcd inv(N, N);
  for (int r = 0; r < N; ++r)
    for (int s = 0; s < N; ++s)
      inv(r, s) = std::polar(1.0 / N, -2.0 * std::numbers::pi * ((static_cast<long>(r) * s) % N) / N);
  for (int mode = 0; mode < L; ++mode) apply_mode(f, inv, mode, N, L);
  return f;
}

// sum_{r, r'} A(r) conj(A(r')) prod_i o(r_i - r'_i)
double harmonic_average(const Eigen::VectorXcd& a, const std::vector<cplx>& o, int n, int L) {
  const int N = n + 1;
  Eigen::MatrixXcd q(N, N);
  for (int r = 0; r < N; ++r)
    for (int rp = 0; rp < N; ++rp) q(r, rp) = o[static_cast<std::size_t>(r - rp + n)];
  Eigen::VectorXcd b = a.conjugate();
  for (int mode = 0; mode < L; ++mode) apply_mode(b, q, mode, N, L);
  return (a.array() * b.array()).sum().real();
}

SffSeries trotter_series(const ModelParams& params, std::span<const int> steps,
                         const std::function<std::vector<cplx>(int)>& o_of_n) {
  params.validate();
  SffSeries out;
  out.L = params.L;
  const double k0 = std::pow(4.0, params.L);
  for (int n : steps) {
    if (n < 0) throw ConfigError("step counts must be non-negative");
    out.times.push_back(n * params.tau);
    if (n == 0) {
      out.values.push_back(k0);
      continue;
    }
    const Eigen::VectorXcd a = trace_harmonics(params, n);
    out.values.push_back(std::max(0.0, harmonic_average(a, o_of_n(n), n, params.L)));
  }
  return out;
}

}  // namespace

DenseHamiltonian build_hamiltonian(const ModelParams& params, std::span<const double> h) {
  params.validate();
  const int L = params.L;
  if (L > kMaxEdSites) throw ResourceError("build_hamiltonian: L above 16");
  if (static_cast<int>(h.size()) != L) throw DimensionError("build_hamiltonian: need one field per site");
  const std::size_t dim = std::size_t{1} << L;
  if (dim * dim * sizeof(double) > kMaxEdBytes) throw ResourceError("build_hamiltonian: matrix exceeds memory cap");
  DenseHamiltonian out;
  out.params = params;
  out.fields.assign(h.begin(), h.end());
  out.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t x = 0; x < dim; ++x) {
    double diag = 0.0;
    for (int i = 0; i < L; ++i) {
      const int si = ((x >> (L - 1 - i)) & 1U) ? -1 : 1;
      diag += h[static_cast<std::size_t>(i)] * si;
      if (i + 1 < L) {
        const int sj = ((x >> (L - 2 - i)) & 1U) ? -1 : 1;
        diag += params.J * si * sj;
      }
      const std::size_t y = x ^ (std::size_t{1} << (L - 1 - i));
      out.matrix(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) += params.b;
    }
    out.matrix(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) = diag;
  }
  return out;
}

Eigen::VectorXd spectrum(const DenseHamiltonian& h) {
  ++g_diagonalizations;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.matrix, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("spectrum: eigensolver failed");
  return es.eigenvalues();
}

std::uint64_t diagonalization_count() { return g_diagonalizations.load(); }

std::vector<double> sff_from_spectrum(const Eigen::VectorXd& energies, std::span<const double> times) {
  check_times(times);
  std::vector<double> out(times.size(), 0.0);
  accumulate_sff(energies, times, 1.0, out);
  return out;
}

std::vector<double> sff_single(const DenseHamiltonian& h, std::span<const double> times) {
  return sff_from_spectrum(spectrum(h), times);
}

std::vector<double> realization_fields(const ModelParams& params, std::uint64_t seed, std::size_t r) {
  RandomStream rng(seed, r);
  std::vector<double> h(static_cast<std::size_t>(params.L));
  for (double& x : h) x = rng.draw(params.spec);
  return h;
}

SffSeries sff_averaged(const ModelParams& params, std::span<const double> times, std::size_t m, std::uint64_t seed,
                       const AverageOptions& options) {
  params.validate();
  check_times(times);
  if (m < 1) throw ConfigError("sff_averaged: need at least one realization");
  if (params.L > kMaxEdSites) throw ResourceError("sff_averaged: L above 16");
  std::vector<std::vector<double>> per(m);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t r = next++; r < m; r = next++) {
      const auto h = realization_fields(params, seed, options.first + r);
      per[r] = sff_single(build_hamiltonian(params, h), times);
    }
  };
  run_workers(worker, options.threads, m);
  SffSeries out;
  out.times.assign(times.begin(), times.end());
  out.values.assign(times.size(), 0.0);
  out.stderr_of_mean.assign(times.size(), 0.0);
  out.L = params.L;
  out.realizations = m;
  out.method = "ed";
  out.seed = seed;
  for (std::size_t k = 0; k < times.size(); ++k) {
    double mean = 0.0;
    for (std::size_t r = 0; r < m; ++r) mean += per[r][k];
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t r = 0; r < m; ++r) var += (per[r][k] - mean) * (per[r][k] - mean);
    out.values[k] = mean;
    out.stderr_of_mean[k] = m > 1 ? std::sqrt(var / static_cast<double>(m - 1) / static_cast<double>(m)) : 0.0;
  }
  return out;
}

SffSeries sff_quadrature_L4(const ModelParams& params, std::span<const double> times, int nodes_per_dim) {
  params.validate();
  check_times(times);
  if (params.L != 4) throw ConfigError("sff_quadrature_L4 requires L = 4");
  if (params.spec.kind != DisorderKind::Uniform) throw ConfigError("sff_quadrature_L4 integrates uniform disorder only");
  if (nodes_per_dim < 16) throw ConfigError("sff_quadrature_L4 needs at least 16 nodes per dimension");
  const QuadratureRule rule = gauss_legendre(nodes_per_dim);
  const double a = params.spec.strength;
  const std::size_t q = rule.nodes.size();
  std::vector<double> acc(times.size(), 0.0);
  std::vector<double> h(4);
  for (std::size_t i0 = 0; i0 < q; ++i0)
    for (std::size_t i1 = 0; i1 < q; ++i1)
      for (std::size_t i2 = 0; i2 < q; ++i2)
        for (std::size_t i3 = 0; i3 < q; ++i3) {
          h = {a * rule.nodes[i0], a * rule.nodes[i1], a * rule.nodes[i2], a * rule.nodes[i3]};
          const double w = rule.weights[i0] * rule.weights[i1] * rule.weights[i2] * rule.weights[i3] / 16.0;
          accumulate_sff(spectrum(build_hamiltonian(params, h)), times, w, acc);
        }
  SffSeries out;
  out.times.assign(times.begin(), times.end());
  out.values = std::move(acc);
  out.L = 4;
  out.method = "quadrature";
  return out;
}

std::vector<double> sff_trotter(const ModelParams& params, std::span<const double> h, std::span<const int> steps) {
  params.validate();
  if (params.L > kMaxTrotterSites) throw ResourceError("sff_trotter: L above 10");
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(trotter_step(params, h), false);
  if (es.info() != Eigen::Success) throw NumericError("sff_trotter: eigensolver failed");
  const Eigen::VectorXcd mu = es.eigenvalues();
  std::vector<double> out;
  for (int n : steps) {
    if (n < 0) throw ConfigError("step counts must be non-negative");
    if (n == 0) {
      out.push_back(std::pow(4.0, params.L));
      continue;
    }
    cplx tr = 0.0;
    for (Eigen::Index i = 0; i < mu.size(); ++i) tr += std::pow(mu(i), n);
    out.push_back(std::norm(tr));
  }
  return out;
}

SffSeries sff_trotter_batch(const ModelParams& params, const RealizationBatch& batch, std::span<const int> steps) {
  if (batch.values.empty()) throw ConfigError("sff_trotter_batch: empty batch");
  auto o = [&](int n) {
    std::vector<cplx> v(static_cast<std::size_t>(2 * n + 1), 0.0);
    for (int d = -n; d <= n; ++d) {
      cplx s = 0.0;
      for (double h : batch.values) s += std::polar(1.0, 2.0 * params.tau * h * d);
      v[static_cast<std::size_t>(d + n)] = s / static_cast<double>(batch.values.size());
    }
    return v;
  };
  SffSeries out = trotter_series(params, steps, o);
  out.realizations = batch.values.size();
  out.seed = batch.seed;
  out.method = "trotter-batch";
  return out;
}

SffSeries sff_trotter_analytic(const ModelParams& params, std::span<const int> steps) {
  auto o = [&](int n) {
    std::vector<cplx> v(static_cast<std::size_t>(2 * n + 1), 0.0);
    for (int d = -n; d <= n; ++d) v[static_cast<std::size_t>(d + n)] = characteristic(params.spec, params.tau, 2.0 * d);
    return v;
  };
  SffSeries out = trotter_series(params, steps, o);
  out.method = "trotter-analytic";
  return out;
}

SpacingRatio level_spacing_ratio(std::span<const double> energies) {
  if (energies.size() < 3) throw ConfigError("level_spacing_ratio: need at least three levels");
  std::vector<double> e(energies.begin(), energies.end());
  std::sort(e.begin(), e.end());
  const double tol = 1e-10 * std::max(1.0, e.back() - e.front());
  SpacingRatio out;
  double sum = 0.0;
  for (std::size_t k = 1; k + 1 < e.size(); ++k) {
    const double g0 = e[k] - e[k - 1], g1 = e[k + 1] - e[k];
    if (g0 <= tol || g1 <= tol) {
      ++out.skipped;
      continue;
    }
    sum += std::min(g0, g1) / std::max(g0, g1);
    ++out.used;
  }
  if (out.used == 0) throw EstimationError("level_spacing_ratio: every gap is degenerate");
  out.mean = sum / static_cast<double>(out.used);
  return out;
}

RatioAverage averaged_spacing_ratio(const ModelParams& params, std::size_t m, std::uint64_t seed,
                                    const AverageOptions& options) {
  params.validate();
  if (m < 1) throw ConfigError("averaged_spacing_ratio: need at least one realization");
  std::vector<SpacingRatio> per(m);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t r = next++; r < m; r = next++) {
      const Eigen::VectorXd e = spectrum(build_hamiltonian(params, realization_fields(params, seed, options.first + r)));
      per[r] = level_spacing_ratio(std::span<const double>(e.data(), static_cast<std::size_t>(e.size())));
    }
  };
  run_workers(worker, options.threads, m);
  RatioAverage out;
  out.realizations = m;
  for (const auto& p : per) {
    out.mean += p.mean;
    out.skipped += p.skipped;
  }
  out.mean /= static_cast<double>(m);
  double var = 0.0;
  for (const auto& p : per) var += (p.mean - out.mean) * (p.mean - out.mean);
  out.stderr_of_mean = m > 1 ? std::sqrt(var / static_cast<double>(m - 1) / static_cast<double>(m)) : 0.0;
  return out;
}

double goe_sff_reference(double t, double d) {
  if (!(t >= 0.0) || !(d >= 1.0)) throw ConfigError("goe_sff_reference: need t >= 0 and D >= 1");
  if (t <= d) return 2.0 * t - t * std::log1p(2.0 * t / d);
  const double x = 2.0 * t / d;
  return 2.0 * d - t * std::log1p(2.0 / (x - 1.0));
}

}  // namespace setn
