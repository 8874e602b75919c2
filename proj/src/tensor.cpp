#include "setn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "setn/errors.hpp"

namespace setn {

std::size_t shape_product(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

namespace {

std::vector<std::size_t> row_major_strides(const Shape& shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
  return strides;
}

}  // namespace

ComplexTensor::ComplexTensor(Shape shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), cplx(0.0, 0.0)) {}

ComplexTensor::ComplexTensor(Shape shape, std::vector<cplx> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_product(shape_))
    throw DimensionError("tensor data size does not match shape");
}

ComplexTensor ComplexTensor::scalar(cplx value) { return ComplexTensor(Shape{}, {value}); }

ComplexTensor ComplexTensor::from_matrix(const Eigen::MatrixXcd& m) {
  ComplexTensor t(Shape{static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  Eigen::Map<MatrixXcdR>(t.data_.data(), m.rows(), m.cols()) = m;
  return t;
}

ComplexTensor ComplexTensor::from_vector(const Eigen::VectorXcd& v) {
  return ComplexTensor(Shape{static_cast<std::size_t>(v.size())},
                       std::vector<cplx>(v.data(), v.data() + v.size()));
}

std::size_t ComplexTensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) throw DimensionError("index rank does not match tensor rank");
  std::size_t off = 0;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= shape_[i]) throw DimensionError("tensor index out of range");
    off = off * shape_[i] + index[i];
  }
  return off;
}

ComplexTensor ComplexTensor::reshape(Shape shape) const {
  if (shape_product(shape) != data_.size()) throw DimensionError("reshape changes element count");
  return ComplexTensor(std::move(shape), data_);
}

ComplexTensor ComplexTensor::permute(std::span<const std::size_t> perm) const {
  const std::size_t r = rank();
  if (perm.size() != r) throw DimensionError("permutation length does not match rank");
  std::vector<bool> seen(r, false);
  for (std::size_t p : perm) {
    if (p >= r || seen[p]) throw DimensionError("invalid permutation");
    seen[p] = true;
  }
  Shape out_shape(r);
  for (std::size_t i = 0; i < r; ++i) out_shape[i] = shape_[perm[i]];
  const auto src_strides = row_major_strides(shape_);
  std::vector<std::size_t> stride(r);
  for (std::size_t i = 0; i < r; ++i) stride[i] = src_strides[perm[i]];

  ComplexTensor out(out_shape);
  if (data_.empty()) return out;
  std::vector<std::size_t> idx(r, 0);
  std::size_t src = 0;
  for (std::size_t k = 0; k < out.data_.size(); ++k) {
    out.data_[k] = data_[src];
    for (std::size_t ax = r; ax-- > 0;) {
      if (++idx[ax] < out_shape[ax]) {
        src += stride[ax];
        break;
      }
      src -= stride[ax] * (out_shape[ax] - 1);
      idx[ax] = 0;
    }
  }
  return out;
}

ComplexTensor ComplexTensor::conj() const {
  ComplexTensor out = *this;
  for (cplx& z : out.data_) z = std::conj(z);
  return out;
}

Eigen::MatrixXcd ComplexTensor::as_matrix(std::size_t row_axes) const {
  if (row_axes > rank()) throw DimensionError("row_axes exceeds rank");
  std::size_t rows = 1;
  for (std::size_t i = 0; i < row_axes; ++i) rows *= shape_[i];
  const std::size_t cols = rows == 0 ? 0 : data_.size() / std::max<std::size_t>(rows, 1);
  return Eigen::Map<const MatrixXcdR>(data_.data(), rows, cols);
}

Eigen::VectorXcd ComplexTensor::as_vector() const {
  return Eigen::Map<const Eigen::VectorXcd>(data_.data(), data_.size());
}

double ComplexTensor::frobenius_norm() const {
  double s = 0.0;
  for (const cplx& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

bool ComplexTensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

ComplexTensor contract(const ComplexTensor& a, const ComplexTensor& b,
                       std::span<const std::pair<std::size_t, std::size_t>> axis_pairs) {
  std::vector<bool> used_a(a.rank(), false), used_b(b.rank(), false);
  std::vector<std::size_t> pa, pb;
  std::size_t inner = 1;
  for (const auto& [ia, ib] : axis_pairs) {
    if (ia >= a.rank() || ib >= b.rank()) throw DimensionError("contraction axis out of range");
    if (used_a[ia] || used_b[ib]) throw DimensionError("contraction axis paired twice");
    if (a.extent(ia) != b.extent(ib))
      throw DimensionError("contraction extent mismatch: " + std::to_string(a.extent(ia)) + " vs " +
                           std::to_string(b.extent(ib)));
    used_a[ia] = used_b[ib] = true;
    pa.push_back(ia);
    pb.push_back(ib);
    inner *= a.extent(ia);
  }
  std::vector<std::size_t> perm_a, perm_b;
  Shape out_shape;
  std::size_t rows = 1, cols = 1;
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (!used_a[i]) {
      perm_a.push_back(i);
      out_shape.push_back(a.extent(i));
      rows *= a.extent(i);
    }
  perm_a.insert(perm_a.end(), pa.begin(), pa.end());
  perm_b = pb;
  for (std::size_t i = 0; i < b.rank(); ++i)
    if (!used_b[i]) {
      perm_b.push_back(i);
      out_shape.push_back(b.extent(i));
      cols *= b.extent(i);
    }
  const ComplexTensor ap = a.permute(perm_a);
  const ComplexTensor bp = b.permute(perm_b);
  ComplexTensor out(out_shape);
  Eigen::Map<const MatrixXcdR> ma(ap.data().data(), rows, inner);
  Eigen::Map<const MatrixXcdR> mb(bp.data().data(), inner, cols);
  Eigen::Map<MatrixXcdR> mc(out.data().data(), rows, cols);
  mc.noalias() = ma * mb;
  return out;
}

void TruncationPolicy::validate() const {
  if (!(rel_threshold >= 0.0 && rel_threshold < 1.0))
    throw ConfigError("truncation threshold must lie in [0, 1)");
  if (max_rank && *max_rank < 1) throw ConfigError("max_rank must be at least 1");
}

std::size_t kept_rank(std::span<const double> s, const TruncationPolicy& policy) {
  if (s.empty() || !(s[0] > 0.0)) return 0;
  const double clamp = kSingularClampFactor * std::numeric_limits<double>::epsilon() * s[0];
  std::size_t k = 1;
  while (k < s.size() && s[k] > clamp && s[k] >= policy.rel_threshold * s[0]) ++k;
  if (policy.max_rank) k = std::min(k, *policy.max_rank);
  return k;
}

SvdResult svd_truncated(const Eigen::MatrixXcd& m, const TruncationPolicy& policy) {
  policy.validate();
  if (!m.allFinite()) throw NumericError("svd_truncated: non-finite input");
  SvdResult res;
  if (m.size() == 0) {
    res.u.resize(m.rows(), 0);
    res.vh.resize(0, m.cols());
    return res;
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  std::vector<double> s(sv.data(), sv.data() + sv.size());
  const std::size_t k = kept_rank(s, policy);
  const double clamp = s.empty() ? 0.0
                                 : kSingularClampFactor * std::numeric_limits<double>::epsilon() * s[0];
  res.full_rank = static_cast<std::size_t>(std::count_if(s.begin(), s.end(),
                                                         [&](double x) { return x > clamp; }));
  double total = 0.0, dropped = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    total += s[i] * s[i];
    if (i >= k) dropped += s[i] * s[i];
  }
  res.discarded_weight = total > 0.0 ? dropped / total : 0.0;
  res.s.assign(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k));
  res.u = svd.matrixU().leftCols(static_cast<Eigen::Index>(k));
  res.vh = svd.matrixV().leftCols(static_cast<Eigen::Index>(k)).adjoint();
  for (Eigen::Index j = 0; j < res.u.cols(); ++j) {
    Eigen::Index imax = 0;
    res.u.col(j).cwiseAbs2().maxCoeff(&imax);
    const cplx z = res.u(imax, j);
    const double az = std::abs(z);
    if (az == 0.0) continue;
    const cplx phase = z / az;
    res.u.col(j) *= std::conj(phase);
    res.vh.row(j) *= phase;
  }
  return res;
}

SvdResult svd_truncated(const ComplexTensor& m, const TruncationPolicy& policy) {
  if (m.rank() != 2) throw DimensionError("svd_truncated expects a rank-2 tensor");
  return svd_truncated(m.as_matrix(1), policy);
}

QrResult qr(const Eigen::MatrixXcd& m) {
  if (!m.allFinite()) throw NumericError("qr: non-finite input");
  const Eigen::Index k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<Eigen::MatrixXcd> dec(m);
  QrResult res;
  res.q = dec.householderQ() * Eigen::MatrixXcd::Identity(m.rows(), k);
  res.r = dec.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < k; ++i) {
    const cplx d = res.r(i, i);
    const double ad = std::abs(d);
    if (ad == 0.0) continue;
    const cplx phase = d / ad;
    res.r.row(i) *= std::conj(phase);
    res.q.col(i) *= phase;
  }
  return res;
}

}  // namespace setn
