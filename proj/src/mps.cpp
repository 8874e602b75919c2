#include "setn/mps.hpp"

#include <algorithm>
#include <cmath>

#include "setn/disorder.hpp"
#include "setn/errors.hpp"

namespace setn {

namespace {

using MapR = Eigen::Map<MatrixXcdR>;
using CMapR = Eigen::Map<const MatrixXcdR>;

// Slice s(:, c, :) of a (Dl, d, Dr) site as a Dl x Dr matrix.
Eigen::MatrixXcd slice(const ComplexTensor& s, std::size_t c) {
  const std::size_t dl = s.extent(0), d = s.extent(1), dr = s.extent(2);
  Eigen::MatrixXcd m(dl, dr);
  for (std::size_t a = 0; a < dl; ++a)
    for (std::size_t b = 0; b < dr; ++b)
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = s.data()[(a * d + c) * dr + b];
  return m;
}

ComplexTensor site_from_matrix(const Eigen::MatrixXcd& m, std::size_t dl, std::size_t d, std::size_t dr) {
  ComplexTensor t(Shape{dl, d, dr});
  MapR(t.data().data(), static_cast<Eigen::Index>(dl * d), static_cast<Eigen::Index>(dr)) = m;
  return t;
}

Eigen::MatrixXcd left_matrix(const ComplexTensor& s) {  // (Dl d) x Dr
  return CMapR(s.data().data(), static_cast<Eigen::Index>(s.extent(0) * s.extent(1)),
               static_cast<Eigen::Index>(s.extent(2)));
}

Eigen::MatrixXcd right_matrix(const ComplexTensor& s) {  // Dl x (d Dr)
  return CMapR(s.data().data(), static_cast<Eigen::Index>(s.extent(0)),
               static_cast<Eigen::Index>(s.extent(1) * s.extent(2)));
}

ComplexTensor multiply_left(const Eigen::MatrixXcd& r, const ComplexTensor& s) {  // r * s over left bond
  const Eigen::MatrixXcd m = r * right_matrix(s);
  ComplexTensor t(Shape{static_cast<std::size_t>(r.rows()), s.extent(1), s.extent(2)});
  MapR(t.data().data(), r.rows(), static_cast<Eigen::Index>(s.extent(1) * s.extent(2))) = m;
  return t;
}

ComplexTensor multiply_right(const ComplexTensor& s, const Eigen::MatrixXcd& r) {  // s * r over right bond
  const Eigen::MatrixXcd m = left_matrix(s) * r;
  return site_from_matrix(m, s.extent(0), s.extent(1), static_cast<std::size_t>(r.cols()));
}

}  // namespace

std::size_t Mps::max_bond() const {
  std::size_t m = 1;
  for (const auto& s : sites) m = std::max({m, s.extent(0), s.extent(2)});
  return m;
}

Mps Mps::product(int length, const Eigen::VectorXcd& local) {
  Mps out;
  const std::size_t d = static_cast<std::size_t>(local.size());
  for (int m = 0; m < length; ++m)
    out.sites.emplace_back(Shape{1, d, 1}, std::vector<cplx>(local.data(), local.data() + local.size()));
  return out;
}

Mps Mps::random(int length, std::size_t phys, std::size_t bond, std::uint64_t seed) {
  RandomStream rng(seed, 0x6d7073);
  Mps out;
  std::vector<std::size_t> dims(static_cast<std::size_t>(length) + 1, 1);
  for (int m = 1; m < length; ++m) {
    double left = std::pow(static_cast<double>(phys), m), right = std::pow(static_cast<double>(phys), length - m);
    dims[static_cast<std::size_t>(m)] =
        static_cast<std::size_t>(std::min({static_cast<double>(bond), left, right}));
  }
  for (int m = 0; m < length; ++m) {
    ComplexTensor t(Shape{dims[static_cast<std::size_t>(m)], phys, dims[static_cast<std::size_t>(m) + 1]});
    for (cplx& z : t.data()) z = cplx(rng.normal(), rng.normal());
    out.sites.push_back(std::move(t));
  }
  const double nrm = norm(out);
  scale(out, 1.0 / nrm);
  return out;
}

Mps Mps::from_dense(const Eigen::VectorXcd& v, int length, std::size_t phys, const TruncationPolicy& policy) {
  Mps out;
  Eigen::MatrixXcd rest = v.transpose();  // 1 x N
  std::size_t left = 1;
  for (int m = 0; m < length - 1; ++m) {
    const Eigen::Index cols = rest.cols() / static_cast<Eigen::Index>(phys);
    // Reshape (left, phys * cols) row-major into (left * phys, cols).
    Eigen::MatrixXcd mat(static_cast<Eigen::Index>(left * phys), cols);
    for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(left); ++a)
      for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(phys); ++c)
        mat.row(a * static_cast<Eigen::Index>(phys) + c) = rest.row(a).segment(c * cols, cols);
    const SvdResult svd = svd_truncated(mat, policy);
    const std::size_t r = std::max<std::size_t>(svd.s.size(), 1);
    Eigen::MatrixXcd u = svd.s.empty() ? Eigen::MatrixXcd::Zero(mat.rows(), 1) : svd.u;
    out.sites.push_back(site_from_matrix(u, left, phys, r));
    if (svd.s.empty()) {
      rest = Eigen::MatrixXcd::Zero(1, cols);
    } else {
      Eigen::VectorXd sd = Eigen::Map<const Eigen::VectorXd>(svd.s.data(), static_cast<Eigen::Index>(svd.s.size()));
      rest = sd.asDiagonal() * svd.vh;
    }
    left = r;
  }
  Eigen::MatrixXcd last(static_cast<Eigen::Index>(left * phys), 1);
  for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(left); ++a)
    for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(phys); ++c)
      last(a * static_cast<Eigen::Index>(phys) + c, 0) = rest(a, c);
  out.sites.push_back(site_from_matrix(last, left, phys, 1));
  return out;
}

Eigen::VectorXcd Mps::to_dense() const {
  if (sites.empty()) return Eigen::VectorXcd();
  // acc holds (prefix configurations) x (right bond), row-major over configurations.
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Ones(1, 1);
  for (const auto& s : sites) {
    const std::size_t d = s.extent(1);
    Eigen::MatrixXcd next(acc.rows() * static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(s.extent(2)));
    for (std::size_t c = 0; c < d; ++c) {
      const Eigen::MatrixXcd prod = acc * slice(s, c);
      for (Eigen::Index r = 0; r < acc.rows(); ++r) next.row(r * static_cast<Eigen::Index>(d) + static_cast<Eigen::Index>(c)) = prod.row(r);
    }
    acc = std::move(next);
  }
  return acc.col(0);
}

cplx overlap(const Mps& a, const Mps& b) {
  if (a.length() != b.length()) throw DimensionError("overlap: MPS lengths differ");
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Ones(1, 1);
  for (int m = 0; m < a.length(); ++m) {
    const auto& sa = a.sites[static_cast<std::size_t>(m)];
    const auto& sb = b.sites[static_cast<std::size_t>(m)];
    if (sa.extent(1) != sb.extent(1)) throw DimensionError("overlap: physical dimensions differ");
    Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(sa.extent(2)),
                                                   static_cast<Eigen::Index>(sb.extent(2)));
    for (std::size_t c = 0; c < sa.extent(1); ++c) next.noalias() += slice(sa, c).adjoint() * e * slice(sb, c);
    e = std::move(next);
  }
  return e(0, 0);
}

double norm(const Mps& a) { return std::sqrt(std::max(0.0, overlap(a, a).real())); }

cplx total_sum(const Mps& a) {
  Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Ones(1);
  for (const auto& s : a.sites) {
    Eigen::RowVectorXcd next = Eigen::RowVectorXcd::Zero(static_cast<Eigen::Index>(s.extent(2)));
    for (std::size_t c = 0; c < s.extent(1); ++c) next.noalias() += v * slice(s, c);
    v = std::move(next);
  }
  return v(0);
}

void scale(Mps& a, cplx factor) {
  if (a.sites.empty()) return;
  for (cplx& z : a.sites[0].data()) z *= factor;
}

void apply_site_operator(Mps& a, const Eigen::MatrixXcd& op) {
  for (auto& s : a.sites) {
    const std::size_t dl = s.extent(0), d = s.extent(1), dr = s.extent(2);
    if (static_cast<std::size_t>(op.cols()) != d) throw DimensionError("site operator dimension mismatch");
    ComplexTensor t(Shape{dl, static_cast<std::size_t>(op.rows()), dr});
    for (std::size_t x = 0; x < dl; ++x)
      for (Eigen::Index c = 0; c < op.rows(); ++c)
        for (std::size_t cp = 0; cp < d; ++cp) {
          const cplx w = op(c, static_cast<Eigen::Index>(cp));
          if (w == cplx(0.0)) continue;
          const cplx* src = s.data().data() + (x * d + cp) * dr;
          cplx* dst = t.data().data() + (x * static_cast<std::size_t>(op.rows()) + static_cast<std::size_t>(c)) * dr;
          for (std::size_t y = 0; y < dr; ++y) dst[y] += w * src[y];
        }
    s = std::move(t);
  }
}

Mps hadamard(const Mps& a, const std::vector<ComplexTensor>& weight) {
  if (static_cast<std::size_t>(a.length()) != weight.size()) throw DimensionError("hadamard: lengths differ");
  Mps out;
  for (std::size_t m = 0; m < weight.size(); ++m) {
    const auto& x = a.sites[m];
    const auto& w = weight[m];
    if (x.extent(1) != w.extent(1)) throw DimensionError("hadamard: physical dimensions differ");
    const std::size_t xa = x.extent(0), xb = x.extent(2), wa = w.extent(0), wb = w.extent(2), d = x.extent(1);
    ComplexTensor t(Shape{xa * wa, d, xb * wb});
    for (std::size_t a1 = 0; a1 < xa; ++a1)
      for (std::size_t a2 = 0; a2 < wa; ++a2)
        for (std::size_t c = 0; c < d; ++c)
          for (std::size_t b1 = 0; b1 < xb; ++b1) {
            const cplx xv = x.data()[(a1 * d + c) * xb + b1];
            if (xv == cplx(0.0)) continue;
            for (std::size_t b2 = 0; b2 < wb; ++b2)
              t.data()[((a1 * wa + a2) * d + c) * (xb * wb) + b1 * wb + b2] = xv * w.data()[(a2 * d + c) * wb + b2];
          }
    out.sites.push_back(std::move(t));
  }
  return out;
}

void right_canonicalize(Mps& a) {
  for (int m = a.length() - 1; m > 0; --m) {
    auto& s = a.sites[static_cast<std::size_t>(m)];
    // s = L Q with Q right-isometric: QR of the adjoint.
    const QrResult f = qr(right_matrix(s).adjoint());
    const Eigen::MatrixXcd qh = f.q.adjoint();  // r x (d Dr)
    ComplexTensor t(Shape{static_cast<std::size_t>(qh.rows()), s.extent(1), s.extent(2)});
    MapR(t.data().data(), qh.rows(), qh.cols()) = qh;
    s = std::move(t);
    auto& prev = a.sites[static_cast<std::size_t>(m - 1)];
    prev = multiply_right(prev, f.r.adjoint());
  }
}

double compress(Mps& a, const TruncationPolicy& policy) {
  const int n = a.length();
  if (n == 0) return 0.0;
  for (int m = 0; m + 1 < n; ++m) {
    auto& s = a.sites[static_cast<std::size_t>(m)];
    const QrResult f = qr(left_matrix(s));
    s = site_from_matrix(f.q, s.extent(0), s.extent(1), static_cast<std::size_t>(f.q.cols()));
    auto& next = a.sites[static_cast<std::size_t>(m + 1)];
    next = multiply_left(f.r, next);
  }
  double discarded = 0.0;
  for (int m = n - 1; m > 0; --m) {
    auto& s = a.sites[static_cast<std::size_t>(m)];
    const SvdResult svd = svd_truncated(right_matrix(s), policy);
    discarded += svd.discarded_weight;
    if (svd.s.empty()) {
      // Zero vector: collapse to bond 1 zeros.
      for (auto& t : a.sites) t = ComplexTensor(Shape{1, t.extent(1), 1});
      return discarded;
    }
    const std::size_t r = svd.s.size();
    ComplexTensor t(Shape{r, s.extent(1), s.extent(2)});
    MapR(t.data().data(), static_cast<Eigen::Index>(r), svd.vh.cols()) = svd.vh;
    s = std::move(t);
    Eigen::VectorXd sd = Eigen::Map<const Eigen::VectorXd>(svd.s.data(), static_cast<Eigen::Index>(r));
    auto& prev = a.sites[static_cast<std::size_t>(m - 1)];
    prev = multiply_right(prev, svd.u * sd.asDiagonal());
  }
  return discarded;
}

double hadamard_compressed(Mps& a, const std::vector<ComplexTensor>& weight, const TruncationPolicy& policy) {
  const int n = a.length();
  if (static_cast<std::size_t>(n) != weight.size()) throw DimensionError("hadamard: lengths differ");
  right_canonicalize(a);
  TruncationPolicy loose = policy;
  loose.rel_threshold = policy.rel_threshold * 0.1;
  if (policy.max_rank) loose.max_rank = 2 * *policy.max_rank;
  double discarded = 0.0;
  // r: (kept) x (x-bond * w-bond) carried to the right.
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Ones(1, 1);
  for (int m = 0; m < n; ++m) {
    const auto& x = a.sites[static_cast<std::size_t>(m)];
    const auto& w = weight[static_cast<std::size_t>(m)];
    const std::size_t xa = x.extent(0), xb = x.extent(2), wa = w.extent(0), wb = w.extent(2), d = x.extent(1);
    const Eigen::Index rows = r.rows();
    Eigen::MatrixXcd theta(rows * static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(xb * wb));
    for (std::size_t c = 0; c < d; ++c) {
      // t1[(k, alpha), b] = sum_a r[k, (a, alpha)] x_c[a, b]
      Eigen::MatrixXcd t1(rows * static_cast<Eigen::Index>(wa), static_cast<Eigen::Index>(xb));
      const Eigen::MatrixXcd xc = slice(x, c), wc = slice(w, c);
      for (Eigen::Index k = 0; k < rows; ++k) {
        Eigen::MatrixXcd rk(static_cast<Eigen::Index>(wa), static_cast<Eigen::Index>(xa));
        for (std::size_t aa = 0; aa < xa; ++aa)
          for (std::size_t al = 0; al < wa; ++al)
            rk(static_cast<Eigen::Index>(al), static_cast<Eigen::Index>(aa)) = r(k, static_cast<Eigen::Index>(aa * wa + al));
        t1.middleRows(k * static_cast<Eigen::Index>(wa), static_cast<Eigen::Index>(wa)) = rk * xc;
      }
      for (Eigen::Index k = 0; k < rows; ++k) {
        const Eigen::MatrixXcd blk =
            wc.transpose() * t1.middleRows(k * static_cast<Eigen::Index>(wa), static_cast<Eigen::Index>(wa));  // wb x xb
        for (std::size_t b1 = 0; b1 < xb; ++b1)
          for (std::size_t b2 = 0; b2 < wb; ++b2)
            theta(k * static_cast<Eigen::Index>(d) + static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b1 * wb + b2)) =
                blk(static_cast<Eigen::Index>(b2), static_cast<Eigen::Index>(b1));
      }
    }
    if (m + 1 < n) {
      const SvdResult svd = svd_truncated(theta, loose);
      discarded += svd.discarded_weight;
      if (svd.s.empty()) {
        for (auto& t : a.sites) t = ComplexTensor(Shape{1, t.extent(1), 1});
        return discarded;
      }
      a.sites[static_cast<std::size_t>(m)] =
          site_from_matrix(svd.u, static_cast<std::size_t>(rows), d, svd.s.size());
      Eigen::VectorXd sd = Eigen::Map<const Eigen::VectorXd>(svd.s.data(), static_cast<Eigen::Index>(svd.s.size()));
      r = sd.asDiagonal() * svd.vh;
    } else {
      a.sites[static_cast<std::size_t>(m)] = site_from_matrix(theta, static_cast<std::size_t>(rows), d, 1);
    }
  }
  return discarded + compress(a, policy);
}

Mps linear_combination(const std::vector<cplx>& coeffs, const std::vector<const Mps*>& vecs,
                       const TruncationPolicy& policy, double* discarded) {
  if (coeffs.size() != vecs.size() || vecs.empty()) throw DimensionError("linear_combination: bad arguments");
  double dw = 0.0;
  Mps acc;
  bool have = false;
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    if (coeffs[i] == cplx(0.0)) continue;
    Mps term = *vecs[i];
    scale(term, coeffs[i]);
    if (!have) {
      acc = std::move(term);
      have = true;
      continue;
    }
    const int n = acc.length();
    Mps sum;
    for (int m = 0; m < n; ++m) {
      const auto& x = acc.sites[static_cast<std::size_t>(m)];
      const auto& y = term.sites[static_cast<std::size_t>(m)];
      const std::size_t d = x.extent(1);
      const bool first = m == 0, last = m == n - 1;
      const std::size_t la = first ? 1 : x.extent(0) + y.extent(0);
      const std::size_t rb = last ? 1 : x.extent(2) + y.extent(2);
      ComplexTensor t(Shape{la, d, rb});
      const std::size_t ox_l = 0, oy_l = first ? 0 : x.extent(0);
      const std::size_t ox_r = 0, oy_r = last ? 0 : x.extent(2);
      for (std::size_t a = 0; a < x.extent(0); ++a)
        for (std::size_t c = 0; c < d; ++c)
          for (std::size_t b = 0; b < x.extent(2); ++b)
            t.data()[((ox_l + a) * d + c) * rb + ox_r + b] += x.data()[(a * d + c) * x.extent(2) + b];
      for (std::size_t a = 0; a < y.extent(0); ++a)
        for (std::size_t c = 0; c < d; ++c)
          for (std::size_t b = 0; b < y.extent(2); ++b)
            t.data()[((oy_l + a) * d + c) * rb + oy_r + b] += y.data()[(a * d + c) * y.extent(2) + b];
      sum.sites.push_back(std::move(t));
    }
    dw += compress(sum, policy);
    acc = std::move(sum);
  }
  if (!have) {
    acc = *vecs[0];
    for (auto& t : acc.sites) t = ComplexTensor(Shape{1, t.extent(1), 1});
  }
  if (discarded) *discarded = dw;
  return acc;
}

std::size_t Mpo::max_bond() const {
  std::size_t m = 1;
  for (const auto& s : sites) m = std::max({m, s.extent(0), s.extent(3)});
  return m;
}

Eigen::MatrixXcd Mpo::to_dense() const {
  // acc: (out configs * in configs) x right bond, built site by site.
  std::size_t dout = 1, din = 1;
  ComplexTensor acc(Shape{1, 1, 1}, {cplx(1.0)});
  for (const auto& s : sites) {
    ComplexTensor next = contract(acc, s, {{2, 0}});  // (out, in, o, i, r)
    next = next.permute({0, 2, 1, 3, 4});
    dout *= s.extent(1);
    din *= s.extent(2);
    acc = next.reshape(Shape{dout, din, s.extent(3)});
  }
  return acc.reshape(Shape{dout, din}).as_matrix(1);
}

Mps apply_mpo(const Mpo& op, const Mps& x) {
  if (op.length() != x.length()) throw DimensionError("apply_mpo: lengths differ");
  Mps out;
  for (int m = 0; m < x.length(); ++m) {
    const auto& w = op.sites[static_cast<std::size_t>(m)];  // (wl, o, i, wr)
    const auto& s = x.sites[static_cast<std::size_t>(m)];   // (a, i, b)
    ComplexTensor t = contract(w, s, {{2, 1}});             // (wl, o, wr, a, b)
    t = t.permute({0, 3, 1, 2, 4});                          // (wl, a, o, wr, b)
    out.sites.push_back(t.reshape(Shape{w.extent(0) * s.extent(0), w.extent(1), w.extent(3) * s.extent(2)}));
  }
  return out;
}

}  // namespace setn
