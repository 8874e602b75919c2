#include "setn/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "setn/errors.hpp"
#include "setn/krylov.hpp"

namespace setn {

namespace {

std::size_t pow4(int n) { return std::size_t{1} << (2 * n); }

struct DenseSpace {
  using Vector = Eigen::VectorXcd;
  std::function<Vector(const Vector&)> op;
  std::size_t n = 0;
  Vector apply(const Vector& x) { return op(x); }
  cplx dot(const Vector& a, const Vector& b) { return a.dot(b); }
  double norm(const Vector& a) { return a.norm(); }
  Vector combine(const std::vector<cplx>& c, const std::vector<const Vector*>& v) {
    Vector out = c[0] * *v[0];
    for (std::size_t i = 1; i < c.size(); ++i) out.noalias() += c[i] * *v[i];
    return out;
  }
  std::size_t dim() const { return n; }
};

struct MpsSpace {
  using Vector = Mps;
  const TransferOperator* op = nullptr;
  TruncationPolicy policy;
  double discarded = 0.0;
  std::size_t bond = 0;
  Vector apply(const Vector& x) {
    double dw = 0.0;
    Mps y = op->apply(x, policy, &dw);
    discarded += dw;
    bond = std::max(bond, y.max_bond());
    return y;
  }
  cplx dot(const Vector& a, const Vector& b) { return overlap(a, b); }
  double norm(const Vector& a) { return setn::norm(a); }
  Vector combine(const std::vector<cplx>& c, const std::vector<const Vector*>& v) {
    double dw = 0.0;
    Mps out = linear_combination(c, v, policy, &dw);
    discarded += dw;
    bond = std::max(bond, out.max_bond());
    return out;
  }
  std::size_t dim() const {
    const int n = op->steps();
    return n >= 31 ? std::numeric_limits<std::size_t>::max() : pow4(n);
  }
};

Eigen::VectorXcd random_vector(std::size_t dim, std::uint64_t seed) {
  RandomStream rng(seed, 0x6b72);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(rng.normal(), rng.normal());
  return v;
}

// <x| A |x> and <x| A^dagger A |x> through left environments.
cplx mpo_expectation(const Mps& x, const Mpo& a) {
  ComplexTensor env(Shape{1, 1, 1}, {cplx(1.0)});
  for (int m = 0; m < x.length(); ++m) {
    const auto& s = x.sites[static_cast<std::size_t>(m)];
    const auto& w = a.sites[static_cast<std::size_t>(m)];
    ComplexTensor t = contract(env, s, {{2, 0}});          // (a', w, c, b)
    t = contract(t, w, {{1, 0}, {2, 2}});                  // (a', b, c', w')
    t = contract(t, s.conj(), {{0, 0}, {2, 1}});           // (b, w', b')
    env = t.permute({2, 1, 0});
  }
  return env.data()[0];
}

double mpo_norm_sq(const Mps& x, const Mpo& a) {
  ComplexTensor env(Shape{1, 1, 1, 1}, {cplx(1.0)});  // (bra, w_dag, w, ket)
  for (int m = 0; m < x.length(); ++m) {
    const auto& s = x.sites[static_cast<std::size_t>(m)];
    const auto& w = a.sites[static_cast<std::size_t>(m)];
    ComplexTensor t = contract(env, s, {{3, 0}});               // (a', v, u, c, b)
    t = contract(t, w, {{2, 0}, {3, 2}});                       // (a', v, b, e, u')
    t = contract(t, w.conj(), {{1, 0}, {3, 1}});                // (a', b, u', f, v')
    t = contract(t, s.conj(), {{0, 0}, {3, 1}});                // (b, u', v', b')
    env = t.permute({3, 2, 1, 0});
  }
  return env.data()[0].real();
}

}  // namespace

TransferOperator::TransferOperator(const ModelParams& params, std::vector<ComplexTensor> layer_cores)
    : params_(params), n_(static_cast<int>(layer_cores.size())), layer_(std::move(layer_cores)) {
  params_.validate();
  if (n_ < 1) throw ConfigError("transfer operator needs at least one step");
  for (const auto& c : layer_)
    if (c.rank() != 3 || c.extent(1) != 4) throw DimensionError("layer cores must have shape (bond, 4, bond)");
  params_.n = n_;
  const GateSet g = build_gates(params_);
  for (int s = 0; s < 2; ++s)
    for (int sp = 0; sp < 2; ++sp)
      for (int k = 0; k < 2; ++k)
        for (int kp = 0; kp < 2; ++kp) site_gate_(2 * s + sp, 2 * k + kp) = g.u1(s, k) * std::conj(g.u1(sp, kp));
}

TransferOperator TransferOperator::from_chain(const ModelParams& params, const SeLayerChain& chain, int n) {
  return TransferOperator(params, chain.weight_cores(n));
}

TransferOperator TransferOperator::analytic(const ModelParams& params, int n) {
  return TransferOperator(params, analytic_layer_cores(params.spec, params.tau, n));
}

TransferOperator TransferOperator::from_dense_layer(const ModelParams& params, const Eigen::VectorXcd& layer, int n) {
  if (static_cast<std::size_t>(layer.size()) != pow4(n)) throw DimensionError("dense layer has wrong length");
  Mps m = Mps::from_dense(layer, n, 4, TruncationPolicy{0.0, std::nullopt});
  return TransferOperator(params, std::move(m.sites));
}

std::size_t TransferOperator::dim() const { return pow4(n_); }

std::vector<ComplexTensor> analytic_layer_cores(const DisorderSpec& spec, double tau, int n) {
  if (n < 1) throw ConfigError("analytic layer needs n >= 1");
  static constexpr int half_delta[4] = {0, -1, 1, 0};
  std::vector<ComplexTensor> cores;
  for (int p = 0; p < n; ++p) {
    const std::size_t left = 2 * static_cast<std::size_t>(p) + 1;
    const bool last = p == n - 1;
    const std::size_t right = last ? 1 : left + 2;
    ComplexTensor t(Shape{left, 4, right});
    for (std::size_t s = 0; s < left; ++s)
      for (std::size_t c = 0; c < 4; ++c) {
        const int running = static_cast<int>(s) - p + half_delta[c];
        if (last) {
          t({s, c, 0}) = characteristic(spec, tau, 2.0 * running);
        } else {
          t({s, c, static_cast<std::size_t>(running + p + 1)}) = 1.0;
        }
      }
    cores.push_back(std::move(t));
  }
  return cores;
}

std::vector<ComplexTensor> ring_cores(const Eigen::Matrix2cd& x, int n) {
  if (n < 1) throw ConfigError("ring needs n >= 1");
  // Forward ring with bond (first spin, current spin); the backward ring uses conj(x).
  auto forward = [&](const Eigen::Matrix2cd& g) {
    std::vector<ComplexTensor> f;
    if (n == 1) {
      ComplexTensor t(Shape{1, 2, 1});
      for (std::size_t j = 0; j < 2; ++j) t({0, j, 0}) = g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
      f.push_back(t);
      return f;
    }
    for (int m = 0; m < n; ++m) {
      const bool first = m == 0, last = m == n - 1;
      ComplexTensor t(Shape{first ? 1u : 4u, 2, last ? 1u : 4u});
      for (std::size_t j = 0; j < 2; ++j) {
        if (first) {
          t({0, j, 2 * j + j}) = 1.0;
          continue;
        }
        for (std::size_t a = 0; a < 2; ++a)
          for (std::size_t b = 0; b < 2; ++b) {
            const cplx step = g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b));
            if (last) {
              t({2 * a + b, j, 0}) = step * g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j));
            } else {
              t({2 * a + b, j, 2 * a + j}) = step;
            }
          }
      }
      f.push_back(t);
    }
    return f;
  };
  const auto fw = forward(x);
  const auto bw = forward(x.conjugate());
  std::vector<ComplexTensor> cores;
  for (int m = 0; m < n; ++m) {
    const auto& a = fw[static_cast<std::size_t>(m)];
    const auto& b = bw[static_cast<std::size_t>(m)];
    ComplexTensor t(Shape{a.extent(0) * b.extent(0), 4, a.extent(2) * b.extent(2)});
    for (std::size_t al = 0; al < a.extent(0); ++al)
      for (std::size_t bl = 0; bl < b.extent(0); ++bl)
        for (std::size_t j = 0; j < 2; ++j)
          for (std::size_t jp = 0; jp < 2; ++jp)
            for (std::size_t ar = 0; ar < a.extent(2); ++ar)
              for (std::size_t br = 0; br < b.extent(2); ++br)
                t({al * b.extent(0) + bl, 2 * j + jp, ar * b.extent(2) + br}) = a({al, j, ar}) * b({bl, jp, br});
    cores.push_back(std::move(t));
  }
  return cores;
}

std::vector<ComplexTensor> TransferOperator::weight_cores() const {
  const GateSet g = build_gates(params_);
  const Mps ring{ring_cores(g.u2, n_)};
  return hadamard(ring, layer_).sites;
}

const Eigen::VectorXcd& TransferOperator::dense_weight() const {
  if (dense_weight_) return *dense_weight_;
  if (n_ > kDenseVectorMaxSteps) throw ResourceError("dense column weight limited to n <= 10");
  Eigen::VectorXcd c = Mps{layer_}.to_dense();
  const Eigen::Matrix2cd x = build_gates(params_).u2;
  const std::size_t dim = pow4(n_);
  std::vector<int> j(static_cast<std::size_t>(n_)), jp(static_cast<std::size_t>(n_));
  for (std::size_t idx = 0; idx < dim; ++idx) {
    for (int m = 0; m < n_; ++m) {
      const std::size_t cm = (idx >> (2 * (n_ - 1 - m))) & 3U;
      j[static_cast<std::size_t>(m)] = static_cast<int>(cm >> 1);
      jp[static_cast<std::size_t>(m)] = static_cast<int>(cm & 1U);
    }
    cplx ring = 1.0;
    for (int m = 0; m < n_; ++m) {
      const std::size_t next = static_cast<std::size_t>((m + 1) % n_), cur = static_cast<std::size_t>(m);
      ring *= x(j[next], j[cur]) * std::conj(x(jp[next], jp[cur]));
    }
    c(static_cast<Eigen::Index>(idx)) *= ring;
  }
  dense_weight_ = std::move(c);
  return *dense_weight_;
}

Eigen::VectorXcd apply_site_gates(const Eigen::VectorXcd& x, const Eigen::Matrix4cd& g, int n) {
  if (static_cast<std::size_t>(x.size()) != pow4(n)) throw DimensionError("apply_site_gates: vector length");
  Eigen::VectorXcd y = x;
  for (int m = 0; m < n; ++m) {
    const std::size_t stride = pow4(n - 1 - m);
    const std::size_t outer = pow4(m);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t i = 0; i < stride; ++i) {
        const std::size_t base = o * 4 * stride + i;
        Eigen::Vector4cd v;
        for (int c = 0; c < 4; ++c) v(c) = y(static_cast<Eigen::Index>(base + static_cast<std::size_t>(c) * stride));
        const Eigen::Vector4cd w = g * v;
        for (int c = 0; c < 4; ++c) y(static_cast<Eigen::Index>(base + static_cast<std::size_t>(c) * stride)) = w(c);
      }
  }
  return y;
}

const Mps& TransferOperator::compressed_weight() const {
  if (!compressed_weight_) {
    Mps w{weight_cores()};
    weight_discarded_ = compress(w, {kWeightThreshold, std::nullopt});
    compressed_weight_ = std::move(w);
  }
  return *compressed_weight_;
}

double TransferOperator::weight_discarded() const {
  compressed_weight();
  return weight_discarded_;
}

Eigen::VectorXcd TransferOperator::apply(const Eigen::VectorXcd& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) throw DimensionError("apply_transfer: vector length mismatch");
  return dense_weight().cwiseProduct(apply_site_gates(x, site_gate_, n_));
}

Mps TransferOperator::apply(const Mps& x, const TruncationPolicy& policy, double* discarded) const {
  if (x.length() != n_ || x.phys_dim() != 4) throw DimensionError("apply_transfer: MPS shape mismatch");
  Mps y = x;
  apply_site_operator(y, site_gate_);
  const double dw = hadamard_compressed(y, compressed_weight().sites, policy);
  if (discarded) *discarded = dw + weight_discarded();
  return y;
}

Mpo TransferOperator::mpo() const {
  Mpo out;
  for (const auto& w : weight_cores()) {
    ComplexTensor t(Shape{w.extent(0), 4, 4, w.extent(2)});
    for (std::size_t a = 0; a < w.extent(0); ++a)
      for (std::size_t co = 0; co < 4; ++co)
        for (std::size_t ci = 0; ci < 4; ++ci)
          for (std::size_t b = 0; b < w.extent(2); ++b)
            t({a, co, ci, b}) = w({a, co, b}) * site_gate_(static_cast<Eigen::Index>(co), static_cast<Eigen::Index>(ci));
    out.sites.push_back(std::move(t));
  }
  return out;
}

Eigen::MatrixXcd dense_transfer(const TransferOperator& op) {
  if (op.steps() > kDenseTransferMaxSteps) throw ResourceError("dense transfer matrix limited to n <= 5");
  const std::size_t d = op.dim();
  Eigen::MatrixXcd t(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d));
    e(static_cast<Eigen::Index>(k)) = 1.0;
    t.col(static_cast<Eigen::Index>(k)) = op.apply(e);
  }
  return t;
}

std::string to_string(EigMethod method) {
  switch (method) {
    case EigMethod::Krylov: return "krylov";
    case EigMethod::Dmrg: return "dmrg";
    case EigMethod::Dense: return "dense";
  }
  return "unknown";
}

EigResult dense_eigs(const TransferOperator& op, int k) {
  const Eigen::MatrixXcd t = dense_transfer(op);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(t);
  const auto order = detail::order_by_magnitude(es.eigenvalues());
  EigResult res;
  res.method = EigMethod::Dense;
  for (int i = 0; i < k && i < static_cast<int>(order.size()); ++i) {
    const int idx = order[static_cast<std::size_t>(i)];
    const cplx lam = es.eigenvalues()(idx);
    const Eigen::VectorXcd x = es.eigenvectors().col(idx);
    res.eigenvalues.push_back(lam);
    res.residuals.push_back((t * x - lam * x).norm() / x.norm());
  }
  return res;
}

EigResult leading_eigs_krylov(const TransferOperator& op, const KrylovSettings& s) {
  KrylovOptions opt{s.k, s.tol, s.max_basis, s.max_restarts};
  EigResult res;
  res.method = EigMethod::Krylov;
  if (op.steps() <= kDenseVectorMaxSteps && !s.mps_vectors) {
    DenseSpace space{[&op](const Eigen::VectorXcd& x) { return op.apply(x); }, op.dim()};
    auto out = krylov_schur(space, random_vector(op.dim(), s.seed), opt);
    res.eigenvalues = out.eigenvalues;
    res.residuals = out.residuals;
    res.iterations = out.restarts;
  } else {
    MpsSpace space;
    space.op = &op;
    space.policy = s.mps_policy;
    auto out = krylov_schur(space, Mps::random(op.steps(), 4, 4, s.seed), opt);
    res.eigenvalues = out.eigenvalues;
    res.residuals = out.residuals;
    res.iterations = out.restarts;
    res.bond_dim = space.bond;
    res.discarded_weight = space.discarded;
  }
  for (double r : res.residuals) res.converged = res.converged && r <= 10.0 * s.tol;
  return res;
}

cplx select_tracked_eigenvalue(std::span<const cplx> candidates, std::optional<cplx> previous) {
  if (candidates.empty()) throw ConfigError("select_tracked_eigenvalue: no candidates");
  auto better_tie = [](cplx a, cplx b) {  // a preferred over b on a tie
    if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
    return a.real() > b.real();
  };
  if (!previous) {
    cplx best = candidates[0];
    for (cplx c : candidates)
      if (better_tie(c, best)) best = c;
    return best;
  }
  const double prev_mag = std::abs(*previous);
  std::vector<cplx> pool;
  for (cplx c : candidates)
    if (std::abs(c) >= prev_mag) pool.push_back(c);
  if (pool.empty()) pool.assign(candidates.begin(), candidates.end());
  cplx best = pool[0];
  double best_d = std::abs(best - *previous);
  for (std::size_t i = 1; i < pool.size(); ++i) {
    const double d = std::abs(pool[i] - *previous);
    if (d < best_d - 1e-12 || (std::abs(d - best_d) <= 1e-12 && better_tie(pool[i], best))) {
      best = pool[i];
      best_d = d;
    }
  }
  return best;
}

namespace {

// Left environment (bra, w, ket) after absorbing site s with MPO tensor w.
ComplexTensor grow_left(const ComplexTensor& env, const ComplexTensor& s, const ComplexTensor& w) {
  ComplexTensor t = contract(env, s, {{2, 0}});      // (a', w, c, b)
  t = contract(t, w, {{1, 0}, {2, 2}});              // (a', b, c', w')
  t = contract(t, s.conj(), {{0, 0}, {2, 1}});       // (b, w', b')
  return t.permute({2, 1, 0});
}

ComplexTensor grow_right(const ComplexTensor& env, const ComplexTensor& s, const ComplexTensor& w) {
  ComplexTensor t = contract(s, env, {{2, 2}});      // (a, c, b', w')
  t = contract(t, w, {{1, 2}, {3, 3}});              // (a, b', w, c')
  t = contract(t, s.conj(), {{1, 2}, {3, 1}});       // (a, w, a')
  return t.permute({2, 1, 0});
}

ComplexTensor apply_two_site(const ComplexTensor& le, const ComplexTensor& w1, const ComplexTensor& w2,
                             const ComplexTensor& re, const ComplexTensor& theta) {
  ComplexTensor t = contract(le, theta, {{2, 0}});   // (a', w1, c1, c2, b)
  t = contract(t, w1, {{1, 0}, {2, 2}});             // (a', c2, b, c1', w2)
  t = contract(t, w2, {{4, 0}, {1, 2}});             // (a', b, c1', c2', w3)
  t = contract(t, re, {{1, 2}, {4, 1}});             // (a', c1', c2', b')
  return t;
}

}  // namespace

DmrgOutcome leading_eig_dmrg(const TransferOperator& op, const DmrgSettings& s) {
  const int n = op.steps();
  const Mpo mpo = op.mpo();
  DmrgOutcome out;
  out.state.chi_D = s.chi_D;
  out.result.method = EigMethod::Dmrg;

  if (n == 1) {
    const EigResult d = dense_eigs(op, std::min(4, s.candidates));
    const cplx lam = select_tracked_eigenvalue(d.eigenvalues, std::nullopt);
    out.result.eigenvalues = {lam};
    out.result.residuals = {d.residuals[0]};
    out.result.bond_dim = 1;
    out.state.eigenvalue = lam;
    out.state.history = {lam};
    return out;
  }

  Mps x = Mps::random(n, 4, s.chi_D, s.seed);
  right_canonicalize(x);
  scale(x, 1.0 / norm(x));
  std::vector<ComplexTensor> left(static_cast<std::size_t>(n) + 1), right(static_cast<std::size_t>(n) + 1);
  left[0] = ComplexTensor(Shape{1, 1, 1}, {cplx(1.0)});
  right[static_cast<std::size_t>(n)] = ComplexTensor(Shape{1, 1, 1}, {cplx(1.0)});
  for (int i = n - 1; i >= 2; --i)
    right[static_cast<std::size_t>(i)] =
        grow_right(right[static_cast<std::size_t>(i) + 1], x.sites[static_cast<std::size_t>(i)], mpo.sites[static_cast<std::size_t>(i)]);

  std::optional<cplx> prev;
  cplx sweep_prev = 0.0;
  bool converged = false;
  const TruncationPolicy policy{1e-14, s.chi_D};

  auto local_update = [&](int i, bool moving_right) {
    const auto& a = x.sites[static_cast<std::size_t>(i)];
    const auto& b = x.sites[static_cast<std::size_t>(i) + 1];
    ComplexTensor theta = contract(a, b, {{2, 0}});  // (Dl, 4, 4, Dr)
    const auto& le = left[static_cast<std::size_t>(i)];
    const auto& re = right[static_cast<std::size_t>(i) + 2];
    const auto& w1 = mpo.sites[static_cast<std::size_t>(i)];
    const auto& w2 = mpo.sites[static_cast<std::size_t>(i) + 1];
    const Shape shape = theta.shape();
    const std::size_t dim = theta.size();
    auto apply = [&](const Eigen::VectorXcd& v) {
      ComplexTensor tv(shape, std::vector<cplx>(v.data(), v.data() + v.size()));
      return apply_two_site(le, w1, w2, re, tv).as_vector();
    };
    std::vector<cplx> cands;
    std::vector<Eigen::VectorXcd> vecs;
    if (dim <= 512) {
      Eigen::MatrixXcd h(dim, dim);
      for (std::size_t k = 0; k < dim; ++k) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
        e(static_cast<Eigen::Index>(k)) = 1.0;
        h.col(static_cast<Eigen::Index>(k)) = apply(e);
      }
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h);
      const auto order = detail::order_by_magnitude(es.eigenvalues());
      for (int c = 0; c < s.candidates && c < static_cast<int>(order.size()); ++c) {
        cands.push_back(es.eigenvalues()(order[static_cast<std::size_t>(c)]));
        vecs.push_back(es.eigenvectors().col(order[static_cast<std::size_t>(c)]));
      }
    } else {
      DenseSpace space{apply, dim};
      KrylovOptions opt{std::min<int>(s.candidates, static_cast<int>(dim)), 1e-12, std::max(24, 3 * s.candidates), 500};
      auto res = krylov_schur(space, theta.as_vector(), opt);
      cands = res.eigenvalues;
      vecs = res.vectors;
    }
    const cplx lam = select_tracked_eigenvalue(cands, prev);
    std::size_t pick = 0;
    for (std::size_t c = 0; c < cands.size(); ++c)
      if (cands[c] == lam) pick = c;
    prev = lam;
    Eigen::VectorXcd v = vecs[pick];
    v.normalize();
    const ComplexTensor tv(shape, std::vector<cplx>(v.data(), v.data() + v.size()));
    const SvdResult svd = svd_truncated(tv.as_matrix(2), policy);
    const std::size_t r = svd.s.size();
    Eigen::VectorXd sd = Eigen::Map<const Eigen::VectorXd>(svd.s.data(), static_cast<Eigen::Index>(r));
    sd /= sd.norm();
    Eigen::MatrixXcd lm = svd.u, rm = svd.vh;
    if (moving_right) {
      rm = sd.asDiagonal() * rm;
    } else {
      lm = lm * sd.asDiagonal();
    }
    ComplexTensor na(Shape{shape[0], 4, r}), nb(Shape{r, 4, shape[3]});
    Eigen::Map<MatrixXcdR>(na.data().data(), lm.rows(), lm.cols()) = lm;
    Eigen::Map<MatrixXcdR>(nb.data().data(), rm.rows(), rm.cols()) = rm;
    x.sites[static_cast<std::size_t>(i)] = std::move(na);
    x.sites[static_cast<std::size_t>(i) + 1] = std::move(nb);
    if (moving_right) {
      left[static_cast<std::size_t>(i) + 1] = grow_left(le, x.sites[static_cast<std::size_t>(i)], w1);
    } else {
      right[static_cast<std::size_t>(i) + 1] = grow_right(re, x.sites[static_cast<std::size_t>(i) + 1], w2);
    }
    return lam;
  };

  int sweep = 0;
  for (; sweep < s.sweeps; ++sweep) {
    cplx lam = 0.0;
    for (int i = 0; i + 1 < n; ++i) lam = local_update(i, true);
    for (int i = n - 2; i >= 0; --i) lam = local_update(i, false);
    out.state.history.push_back(lam);
    if (sweep > 0 && std::abs(lam - sweep_prev) <= s.tol * std::abs(lam)) {
      converged = true;
      ++sweep;
      break;
    }
    sweep_prev = lam;
  }

  const cplx lam = out.state.history.back();
  out.state.mps = x;
  out.state.eigenvalue = lam;
  out.state.previous = prev;
  double resid;
  if (n <= kDenseVectorMaxSteps) {
    const Eigen::VectorXcd v = x.to_dense();
    resid = (op.apply(v) - lam * v).norm() / v.norm();
  } else {
    const double nn = overlap(x, x).real();
    const double r2 = mpo_norm_sq(x, mpo) - 2.0 * (std::conj(lam) * mpo_expectation(x, mpo)).real() + std::norm(lam) * nn;
    resid = std::sqrt(std::max(0.0, r2) / nn);
  }
  out.result.eigenvalues = {lam};
  out.result.residuals = {resid};
  out.result.converged = converged;
  out.result.iterations = sweep;
  out.result.bond_dim = x.max_bond();
  return out;
}

NetworkValue network_sff_value(const TransferOperator& op, int L, const TruncationPolicy& policy) {
  if (L < 1) throw ConfigError("network SFF needs L >= 1");
  NetworkValue v;
  cplx k;
  if (op.steps() <= kDenseVectorMaxSteps) {
    Eigen::VectorXcd x = op.dense_weight();
    for (int i = 1; i < L; ++i) x = op.apply(x);
    k = x.sum();
  } else {
    // K = a^T b with b = T^q C and a = (T^T)^p 1, p + q = L - 1; T^T 1 = G^T C needs no truncation.
    const Mps& c = op.compressed_weight();
    v.discarded += op.weight_discarded();
    const int q = (L - 1) / 2, p = L - 1 - q;
    Mps b = c;
    for (int i = 0; i < q; ++i) {
      apply_site_operator(b, op.site_gate());
      v.discarded += hadamard_compressed(b, c.sites, policy);
    }
    if (p == 0) {
      k = total_sum(b);
    } else {
      const Eigen::Matrix4cd gt = op.site_gate().transpose();
      Mps a = c;
      apply_site_operator(a, gt);
      for (int i = 1; i < p; ++i) {
        v.discarded += hadamard_compressed(a, c.sites, policy);
        apply_site_operator(a, gt);
      }
      for (auto& t : a.sites)
        for (auto& e : t.data()) e = std::conj(e);
      k = overlap(a, b);
    }
  }
  v.k = k.real();
  v.imag = k.imag();
  return v;
}

SffSeries sff_via_network(const ModelParams& params, const SeLayerChain& chain, const TruncationPolicy& policy,
                          const NetworkOptions& options) {
  params.validate();
  std::vector<int> steps = options.steps;
  if (steps.empty())
    for (int m = 0; m <= chain.steps(); ++m) steps.push_back(m);
  SffSeries out;
  out.L = params.L;
  out.realizations = chain.realizations;
  out.method = "setn";
  out.seed = chain.seed;
  const double k0 = std::pow(4.0, params.L);
  for (int m : steps) {
    if (m < 0 || m > chain.steps()) throw ConfigError("sff_via_network: step count outside the chain");
    out.times.push_back(m * params.tau);
    if (m == 0) {
      out.values.push_back(k0);
      continue;
    }
    const TransferOperator op = TransferOperator::from_chain(params, chain, m);
    const NetworkValue v = network_sff_value(op, params.L, policy);
    const double dw = 1.0 - (1.0 - chain.total_discarded_weight(m)) * (1.0 - v.discarded);
    double k = v.k;
    if (dw > options.discarded_bound)
      out.warnings.push_back("n=" + std::to_string(m) + ": discarded weight " + std::to_string(dw) + " above bound");
    if (k < 0.0) {
      if (k < -1e-8) out.warnings.push_back("n=" + std::to_string(m) + ": negative K clamped to 0");
      k = 0.0;
    }
    out.values.push_back(k);
  }
  return out;
}

}  // namespace setn
