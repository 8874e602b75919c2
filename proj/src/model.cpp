#include "setn/model.hpp"

#include <cmath>

#include "setn/errors.hpp"

namespace setn {

namespace {

int sigma_of(std::size_t bit) { return bit ? -1 : 1; }

Eigen::Matrix2cd x_rotation(double angle) {
  Eigen::Matrix2cd m;
  const cplx c(std::cos(angle), 0.0), s(0.0, -std::sin(angle));
  m << c, s, s, c;
  return m;
}

}  // namespace

void ModelParams::validate() const {
  spec.validate();
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau must be positive");
  if (n < 0) throw ConfigError("step count n must be non-negative");
  if (L < 1) throw ConfigError("site count L must be at least 1");
  if (!std::isfinite(J) || !std::isfinite(b)) throw ConfigError("J and b must be finite");
}

GateSplit split_two_site_gate(const Eigen::Matrix4cd& gate) {
  Eigen::Matrix4cd r;
  for (int o1 = 0; o1 < 2; ++o1)
    for (int o2 = 0; o2 < 2; ++o2)
      for (int i1 = 0; i1 < 2; ++i1)
        for (int i2 = 0; i2 < 2; ++i2) r(2 * i1 + o1, 2 * i2 + o2) = gate(2 * o1 + o2, 2 * i1 + i2);
  TruncationPolicy policy{1e-12, std::nullopt};
  const SvdResult svd = svd_truncated(Eigen::MatrixXcd(r), policy);
  GateSplit out;
  out.chi = svd.s.size();
  out.vl = ComplexTensor(Shape{2, 2, out.chi});
  out.vr = ComplexTensor(Shape{out.chi, 2, 2});
  for (std::size_t k = 0; k < out.chi; ++k) {
    const double w = std::sqrt(svd.s[k]);
    for (std::size_t row = 0; row < 4; ++row) {
      out.vl({row / 2, row % 2, k}) = svd.u(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(k)) * w;
      out.vr({k, row / 2, row % 2}) = svd.vh(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(row)) * w;
    }
  }
  return out;
}

GateSet build_gates(const ModelParams& params) {
  params.validate();
  GateSet g;
  g.two_site = Eigen::Matrix4cd::Zero();
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      g.two_site(2 * a + b, 2 * a + b) = std::polar(1.0, -params.tau * params.J * sigma_of(a) * sigma_of(b));
  g.one_site = x_rotation(params.tau * params.b);
  const GateSplit split = split_two_site_gate(g.two_site);
  g.vl = split.vl;
  g.vr = split.vr;
  g.chi_g = split.chi;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      g.u1(a, b) = std::polar(1.0, -params.tau * params.J * sigma_of(a) * sigma_of(b));
  g.u2 = g.one_site;
  return g;
}

DisorderFactor factor_general_disorder(const Eigen::Matrix2cd& hi, double h, double tau) {
  if (!hi.allFinite()) throw NumericError("factor_general_disorder: non-finite input");
  const double scale = std::max(1.0, hi.norm());
  if ((hi - hi.adjoint()).norm() > 1e-12 * scale) throw ConfigError("factor_general_disorder: Hi is not Hermitian");
  DisorderFactor out;
  if (hi(0, 1) == cplx(0.0) && hi(1, 0) == cplx(0.0)) {
    out.u = Eigen::Matrix2cd::Identity();
    for (int k = 0; k < 2; ++k) out.v[static_cast<std::size_t>(k)] = std::polar(1.0, -tau * h * hi(k, k).real());
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(hi);
  out.u = es.eigenvectors();
  for (int k = 0; k < 2; ++k) {
    Eigen::Index imax = 0;
    out.u.col(k).cwiseAbs2().maxCoeff(&imax);
    const cplx z = out.u(imax, k);
    out.u.col(k) *= std::conj(z / std::abs(z));
    out.v[static_cast<std::size_t>(k)] = std::polar(1.0, -tau * h * es.eigenvalues()(k));
  }
  return out;
}

WTensor build_w_tensor(const GateSet& gates, ColumnEdge edge) {
  const std::size_t chi = gates.chi_g;
  const std::size_t chi_l = edge == ColumnEdge::Left ? 1 : chi;
  const std::size_t chi_r = edge == ColumnEdge::Right ? 1 : chi;
  WTensor w;
  w.edge = edge;
  w.data = ComplexTensor(Shape{2, 2, chi_l, chi_r, 2});
  for (std::size_t jn = 0; jn < 2; ++jn)
    for (std::size_t jn1 = 0; jn1 < 2; ++jn1)
      for (std::size_t kl = 0; kl < chi_l; ++kl)
        for (std::size_t kr = 0; kr < chi_r; ++kr) {
          // l = p = j_n; left half-gate maps p -> q, right half-gate q -> r, then x maps r -> j_{n+1}.
          cplx acc = 0.0;
          for (std::size_t q = 0; q < 2; ++q) {
            const cplx left = edge == ColumnEdge::Left ? cplx(jn == q ? 1.0 : 0.0) : gates.vr({kl, jn, q});
            if (left == cplx(0.0)) continue;
            for (std::size_t r = 0; r < 2; ++r) {
              const cplx right = edge == ColumnEdge::Right ? cplx(q == r ? 1.0 : 0.0) : gates.vl({q, r, kr});
              acc += left * right * gates.one_site(static_cast<Eigen::Index>(jn1), static_cast<Eigen::Index>(r));
            }
          }
          w.data({jn, jn1, kl, kr, jn}) = acc;
        }
  return w;
}

FastGates build_fast_gates(const ModelParams& params) {
  const GateSet g = build_gates(params);
  FastGates f;
  f.delta5 = ComplexTensor(Shape{2, 2, 2, 2, 2});
  f.delta5({0, 0, 0, 0, 0}) = 1.0;
  f.delta5({1, 1, 1, 1, 1}) = 1.0;
  f.u1 = g.u1;
  f.u2 = g.u2;
  return f;
}

Eigen::MatrixXcd pauli_sum_matrix(int L, char which) {
  const std::size_t dim = std::size_t{1} << L;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t s = 0; s < dim; ++s)
    for (int i = 0; i < L; ++i) {
      const std::size_t bit = std::size_t{1} << (L - 1 - i);
      if (which == 'z') {
        m(s, s) += static_cast<double>(sigma_of(s & bit));
      } else if (which == 'x') {
        m(s ^ bit, s) += 1.0;
      } else {
        throw ConfigError("pauli_sum_matrix: unknown Pauli");
      }
    }
  return m;
}

Eigen::MatrixXcd zz_sum_matrix(int L) {
  const std::size_t dim = std::size_t{1} << L;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t s = 0; s < dim; ++s)
    for (int i = 0; i + 1 < L; ++i)
      m(s, s) += static_cast<double>(sigma_of((s >> (L - 1 - i)) & 1U) * sigma_of((s >> (L - 2 - i)) & 1U));
  return m;
}

Eigen::MatrixXcd field_matrix(std::span<const double> h) {
  const int L = static_cast<int>(h.size());
  const std::size_t dim = std::size_t{1} << L;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t s = 0; s < dim; ++s)
    for (int i = 0; i < L; ++i) m(s, s) += h[static_cast<std::size_t>(i)] * sigma_of((s >> (L - 1 - i)) & 1U);
  return m;
}

Eigen::MatrixXcd trotter_step(const ModelParams& params, std::span<const double> h) {
  if (static_cast<int>(h.size()) != params.L) throw DimensionError("trotter_step: field count differs from L");
  if (params.L > 14) throw ResourceError("trotter_step: dense step limited to L <= 14");
  const int L = params.L;
  const std::size_t dim = std::size_t{1} << L;
  Eigen::VectorXcd diag(dim);
  for (std::size_t s = 0; s < dim; ++s) {
    double e = 0.0;
    for (int i = 0; i < L; ++i) {
      const int si = sigma_of((s >> (L - 1 - i)) & 1U);
      e += h[static_cast<std::size_t>(i)] * si;
      if (i + 1 < L) e += params.J * si * sigma_of((s >> (L - 2 - i)) & 1U);
    }
    diag(static_cast<Eigen::Index>(s)) = std::polar(1.0, -params.tau * e);
  }
  // X layer as a Kronecker product of one-site rotations.
  const Eigen::Matrix2cd x = x_rotation(params.tau * params.b);
  Eigen::MatrixXcd xk = Eigen::MatrixXcd::Ones(1, 1);
  for (int i = 0; i < L; ++i) {
    Eigen::MatrixXcd next(xk.rows() * 2, xk.cols() * 2);
    for (Eigen::Index r = 0; r < xk.rows(); ++r)
      for (Eigen::Index c = 0; c < xk.cols(); ++c) next.block<2, 2>(2 * r, 2 * c) = xk(r, c) * x;
    xk = std::move(next);
  }
  return xk * diag.asDiagonal();
}

}  // namespace setn
