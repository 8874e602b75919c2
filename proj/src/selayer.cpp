#include "setn/selayer.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "setn/errors.hpp"

namespace setn {

namespace {

int sigma_of(int bit) { return bit ? -1 : 1; }

void check_layer_args(const RealizationBatch& batch, int n, double tau) {
  if (n < 1) throw ConfigError("statistics layer needs n >= 1");
  if (batch.values.empty()) throw ConfigError("statistics layer needs at least one realization");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
}

// Rows of the unitary mapping (1, e^{-2i th}, e^{2i th}, 1) to sqrt2 (1, cos 2th, sin 2th, 0).
const std::array<std::array<cplx, 4>, 4>& real_basis() {
  static const std::array<std::array<cplx, 4>, 4> q = [] {
    const double r = 1.0 / std::numbers::sqrt2;
    const cplx i(0.0, 1.0);
    return std::array<std::array<cplx, 4>, 4>{{{r, 0.0, 0.0, r},
                                               {0.0, r, r, 0.0},
                                               {0.0, i * r, -i * r, 0.0},
                                               {r, 0.0, 0.0, -r}}};
  }();
  return q;
}

double relative_discarded(const Eigen::VectorXd& s, std::size_t kept) {
  double total = 0.0, dropped = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    total += s(i) * s(i);
    if (static_cast<std::size_t>(i) >= kept) dropped += s(i) * s(i);
  }
  return total > 0.0 ? dropped / total : 0.0;
}

}  // namespace

cplx layer_phase(double h, double tau, int c) {
  const int j = c >> 1, jp = c & 1;
  return std::polar(1.0, tau * h * (sigma_of(jp) - sigma_of(j)));
}

std::uint64_t doubled_index(std::uint64_t lp, std::uint64_t l, int n) {
  std::uint64_t idx = 0;
  for (int p = 0; p < n; ++p) {
    const int shift = n - 1 - p;
    const std::uint64_t c = 2 * ((l >> shift) & 1U) + ((lp >> shift) & 1U);
    idx = idx * 4 + c;
  }
  return idx;
}

cplx UncompressedLayer::entry(std::span<const int> c) const {
  if (static_cast<int>(c.size()) != steps) throw DimensionError("layer entry: wrong number of steps");
  cplx acc = 0.0;
  for (double h : fields) {
    cplx prod = 1.0;
    for (int cp : c) prod *= layer_phase(h, tau, cp);
    acc += prod;
  }
  return acc / static_cast<double>(fields.size());
}

Eigen::MatrixXcd UncompressedLayer::dense_matrix() const {
  if (steps > kMaxDenseOSteps) throw ResourceError("dense layer limited to n <= 12 steps");
  const std::size_t dim = std::size_t{1} << steps;
  Eigen::MatrixXcd o = Eigen::MatrixXcd::Zero(dim, dim);
  std::vector<int> c(static_cast<std::size_t>(steps));
  for (std::size_t lp = 0; lp < dim; ++lp)
    for (std::size_t l = 0; l < dim; ++l) {
      for (int p = 0; p < steps; ++p) {
        const int shift = steps - 1 - p;
        c[static_cast<std::size_t>(p)] = static_cast<int>(2 * ((l >> shift) & 1U) + ((lp >> shift) & 1U));
      }
      o(static_cast<Eigen::Index>(lp), static_cast<Eigen::Index>(l)) = entry(c);
    }
  return o;
}

UncompressedLayer build_se_layer(const RealizationBatch& batch, int n, double tau) {
  check_layer_args(batch, n, tau);
  return UncompressedLayer{batch.values, tau, n};
}

std::size_t SeLayerChain::max_bond() const {
  std::size_t m = 1;
  for (std::size_t b : bond_dims) m = std::max(m, b);
  return m;
}

double SeLayerChain::total_discarded_weight(int prefix) const {
  const std::size_t m = prefix < 0 ? discarded.size() : static_cast<std::size_t>(prefix);
  double keep = 1.0;
  for (std::size_t p = 0; p < m && p < discarded.size(); ++p) keep *= 1.0 - discarded[p];
  return 1.0 - keep;
}

std::vector<ComplexTensor> SeLayerChain::weight_cores(int m) const {
  if (m < 1 || m > steps()) throw DimensionError("weight_cores: prefix length out of range");
  const double per_core = std::exp(log_scales[static_cast<std::size_t>(m - 1)] / m);
  std::vector<ComplexTensor> out(cores.begin(), cores.begin() + m);
  for (ComplexTensor& t : out)
    for (cplx& z : t.data()) z *= per_core;
  // Close the right end with the terminal vector.
  const Eigen::VectorXcd& w = terminals[static_cast<std::size_t>(m - 1)];
  ComplexTensor term(Shape{static_cast<std::size_t>(w.size()), 1}, std::vector<cplx>(w.data(), w.data() + w.size()));
  out.back() = contract(out.back(), term, {{2, 0}});
  return out;
}

Eigen::VectorXcd SeLayerChain::dense_vector(int m) const {
  if (m > kMaxDenseOSteps) throw ResourceError("dense layer vector limited to 12 steps");
  const auto w = weight_cores(m);
  ComplexTensor acc = w[0].reshape(Shape{4, w[0].extent(2)});
  for (std::size_t p = 1; p < w.size(); ++p) {
    acc = contract(acc, w[p], {{1, 0}});
    acc = acc.reshape(Shape{acc.extent(0) * 4, acc.extent(2)});
  }
  return acc.as_vector();
}

Eigen::MatrixXcd SeLayerChain::dense_matrix(int m) const {
  const Eigen::VectorXcd v = dense_vector(m);
  const std::size_t dim = std::size_t{1} << m;
  Eigen::MatrixXcd o(dim, dim);
  for (std::size_t lp = 0; lp < dim; ++lp)
    for (std::size_t l = 0; l < dim; ++l)
      o(static_cast<Eigen::Index>(lp), static_cast<Eigen::Index>(l)) =
          v(static_cast<Eigen::Index>(doubled_index(lp, l, m)));
  return o;
}

SeLayerChain compress_streaming(const RealizationBatch& batch, int n, double tau, const TruncationPolicy& policy) {
  check_layer_args(batch, n, tau);
  policy.validate();
  const Eigen::Index m = static_cast<Eigen::Index>(batch.values.size());
  const double inv_m = 1.0 / static_cast<double>(m);
  const auto& q = real_basis();

  SeLayerChain chain;
  chain.tau = tau;
  chain.spec = batch.spec;
  chain.realizations = batch.values.size();
  chain.seed = batch.seed;
  chain.policy = policy;

  // Real phase tables: sqrt2 * (1, cos 2 theta, sin 2 theta).
  Eigen::VectorXd c2(m), s2(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double th = 2.0 * tau * batch.values[static_cast<std::size_t>(j)];
    c2(j) = std::numbers::sqrt2 * std::cos(th);
    s2(j) = std::numbers::sqrt2 * std::sin(th);
  }
  // g = (S V)^T, one column per bond index.
  Eigen::MatrixXd g = Eigen::MatrixXd::Ones(m, 1);
  double log_scale = 0.0;
  const std::size_t table_numbers = 2 * static_cast<std::size_t>(m);

  for (int p = 0; p < n; ++p) {
    const Eigen::Index chi = g.cols();
    Eigen::MatrixXd bt(m, 3 * chi);
    for (Eigen::Index a = 0; a < chi; ++a) {
      bt.col(3 * a) = std::numbers::sqrt2 * g.col(a);
      bt.col(3 * a + 1) = g.col(a).cwiseProduct(c2);
      bt.col(3 * a + 2) = g.col(a).cwiseProduct(s2);
    }
    chain.peak_aux_numbers =
        std::max(chain.peak_aux_numbers, static_cast<std::size_t>(bt.size() + g.size()) + table_numbers);
    g.resize(0, 0);

    Eigen::HouseholderQR<Eigen::Ref<Eigen::MatrixXd>> dec(bt);
    const Eigen::Index k = std::min(m, 3 * chi);
    const Eigen::MatrixXd r = bt.topRows(k).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    std::vector<double> s(sv.data(), sv.data() + sv.size());
    const std::size_t kept = kept_rank(s, policy);
    if (kept == 0) throw DegenerateTruncationError("streaming compression kept no singular values");
    const Eigen::Index kk = static_cast<Eigen::Index>(kept);
    const double s0 = s[0];

    // New (S V)^T = Q P Sigma, normalised so that S_0 = 1.
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(m, kk);
    y.topRows(k) = svd.matrixU().leftCols(kk) * (sv.head(kk) / s0).asDiagonal();
    y.applyOnTheLeft(dec.householderQ());
    chain.peak_aux_numbers =
        std::max(chain.peak_aux_numbers, static_cast<std::size_t>(bt.size() + y.size()) + table_numbers);
    g = std::move(y);

    // Core in the complex doubled basis: A[a, c, b] = sum_q conj(q[q][c]) W[(a, q), b].
    const Eigen::MatrixXd& w = svd.matrixV();
    ComplexTensor core(Shape{static_cast<std::size_t>(chi), 4, kept});
    for (Eigen::Index a = 0; a < chi; ++a)
      for (int c = 0; c < 4; ++c)
        for (Eigen::Index b = 0; b < kk; ++b) {
          cplx acc = 0.0;
          for (int qq = 0; qq < 3; ++qq) acc += std::conj(q[qq][c]) * w(3 * a + qq, b);
          core({static_cast<std::size_t>(a), static_cast<std::size_t>(c), static_cast<std::size_t>(b)}) = acc;
        }

    chain.log_s0.push_back(log_scale + std::log(s0));
    log_scale += std::log(s0);
    std::vector<double> rel(kept);
    for (std::size_t i = 0; i < kept; ++i) rel[i] = s[i] / s0;
    chain.spectra.push_back(std::move(rel));
    chain.discarded.push_back(relative_discarded(sv, kept));
    chain.bond_dims.push_back(kept);
    chain.cores.push_back(std::move(core));
    chain.terminals.push_back((g.transpose() * Eigen::VectorXd::Constant(m, inv_m)).cast<cplx>());
    chain.log_scales.push_back(log_scale);
  }
  return chain;
}

SeLayerChain compress_naive(const RealizationBatch& batch, int n, double tau, const TruncationPolicy& policy) {
  check_layer_args(batch, n, tau);
  policy.validate();
  if (n > kNaiveMaxSteps) throw ResourceError("naive compression limited to n <= 10 steps");
  const std::size_t mm = batch.values.size();
  if (mm * 4 * static_cast<std::size_t>(n) > kNaiveMaxCoreEntries)
    throw ResourceError("naive compression: bond-M cores exceed the memory guard");
  const Eigen::Index m = static_cast<Eigen::Index>(mm);

  // Diagonal MPO-addition cores A_p[j, c, j] = phase_j(c), stored as (M x 4) per step.
  std::vector<Eigen::MatrixXcd> diag_cores(static_cast<std::size_t>(n), Eigen::MatrixXcd(m, 4));
  for (auto& d : diag_cores)
    for (Eigen::Index j = 0; j < m; ++j)
      for (int c = 0; c < 4; ++c) d(j, c) = layer_phase(batch.values[static_cast<std::size_t>(j)], tau, c);

  SeLayerChain chain;
  chain.tau = tau;
  chain.spec = batch.spec;
  chain.realizations = mm;
  chain.seed = batch.seed;
  chain.policy = policy;

  Eigen::MatrixXcd x = Eigen::MatrixXcd::Ones(1, m);  // S V
  for (int p = 0; p < n; ++p) {
    const Eigen::Index chi = x.rows();
    const Eigen::MatrixXcd& a = diag_cores[static_cast<std::size_t>(p)];
    Eigen::MatrixXcd b(4 * chi, m);
    for (Eigen::Index r = 0; r < chi; ++r)
      for (int c = 0; c < 4; ++c) b.row(4 * r + c) = x.row(r).cwiseProduct(a.col(c).transpose());
    const SvdResult svd = svd_truncated(b, policy);
    if (svd.s.empty()) throw DegenerateTruncationError("naive compression kept no singular values");
    const std::size_t kept = svd.s.size();
    ComplexTensor core(Shape{static_cast<std::size_t>(chi), 4, kept});
    for (Eigen::Index r = 0; r < 4 * chi; ++r)
      for (std::size_t k = 0; k < kept; ++k)
        core.data()[static_cast<std::size_t>(r) * kept + k] = svd.u(r, static_cast<Eigen::Index>(k));
    Eigen::VectorXd sd = Eigen::Map<const Eigen::VectorXd>(svd.s.data(), static_cast<Eigen::Index>(kept));
    x = sd.asDiagonal() * svd.vh;

    std::vector<double> rel(kept);
    for (std::size_t i = 0; i < kept; ++i) rel[i] = svd.s[i] / svd.s[0];
    chain.spectra.push_back(std::move(rel));
    chain.log_s0.push_back(std::log(svd.s[0]));
    chain.discarded.push_back(svd.discarded_weight);
    chain.bond_dims.push_back(kept);
    chain.cores.push_back(std::move(core));
    chain.terminals.push_back(x * Eigen::VectorXcd::Constant(m, 1.0 / static_cast<double>(m)));
    chain.log_scales.push_back(0.0);
  }
  return chain;
}

SpectrumSeries spectrum_series(const SeLayerChain& chain) {
  SpectrumSeries out;
  const double clamp = kSingularClampFactor * std::numeric_limits<double>::epsilon();
  for (int p = 0; p < chain.steps(); ++p) {
    out.times.push_back((p + 1) * chain.tau);
    std::vector<double> r;
    for (double s : chain.spectra[static_cast<std::size_t>(p)])
      if (s > clamp) r.push_back(s * s);
    out.ratios.push_back(std::move(r));
  }
  return out;
}

std::vector<ScalingFit> fit_scaling_coefficients(const SpectrumSeries& series, double alpha, double tau,
                                                 double x_max, double x_min) {
  std::vector<ScalingFit> fits;
  for (int i = 1;; ++i) {
    std::vector<double> lx, lr;
    for (std::size_t p = 0; p < series.times.size(); ++p) {
      const double x = alpha * alpha * tau * series.times[p];
      if (!(x > 0.0) || x > x_max || x < x_min) continue;
      const auto& r = series.ratios[p];
      if (static_cast<std::size_t>(i) >= r.size()) continue;
      lx.push_back(std::log(x));
      lr.push_back(std::log(r[static_cast<std::size_t>(i)]));
    }
    if (lx.size() < 2) {
      if (i == 1) throw EstimationError("fit_scaling_coefficients: fewer than two points for ratio 1");
      break;
    }
    const double np = static_cast<double>(lx.size());
    double mean_off = 0.0, mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      mean_off += lr[k] - i * lx[k];
      mx += lx[k];
      my += lr[k];
    }
    mean_off /= np;
    mx /= np;
    my /= np;
    double rss = 0.0, sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      const double e = lr[k] - i * lx[k] - mean_off;
      rss += e * e;
      sxy += (lx[k] - mx) * (lr[k] - my);
      sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    ScalingFit f;
    f.index = i;
    f.c = std::exp(mean_off);
    f.residual = std::sqrt(rss / np);
    f.slope = sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
    f.points = lx.size();
    fits.push_back(f);
  }
  return fits;
}

PredictedRatios predicted_ratios(int n, double alpha, double tau) {
  if (n < 0) throw ConfigError("predicted_ratios: n must be non-negative");
  const double a = alpha * alpha * tau * tau;
  const double np1 = n + 1.0, nn = n;
  const double e1 = 1.0 - (2.0 * np1 / 3.0) * a + ((38.0 * nn * nn + 43.0 * nn + 20.0) / 45.0) * a * a;
  const double e2 = (2.0 * np1 / 3.0) * a - (4.0 * np1 * (3.0 * nn + 2.0) / 15.0) * a * a;
  const double e3 = (4.0 * np1 * (2.0 * nn + 1.0) / 45.0) * a * a;
  PredictedRatios out;
  out.r2 = e2 / e1;
  out.r3 = e3 / e1;
  out.perturbative = alpha * alpha * tau * (np1 * tau) <= kPerturbativeWindow;
  return out;
}

EncodingCheck encoding_criterion(double n, double alpha, double t, double required_margin) {
  EncodingCheck out;
  const double denom = alpha * alpha * t * t;
  out.margin = denom > 0.0 ? n / denom : std::numeric_limits<double>::infinity();
  out.pass = out.margin >= required_margin;
  return out;
}

}  // namespace setn
