#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace setn {

using cplx = std::complex<double>;
using Shape = std::vector<std::size_t>;
using MatrixXcdR = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense complex tensor stored row-major: the last axis varies fastest.
class ComplexTensor {
 public:
  ComplexTensor() = default;
  explicit ComplexTensor(Shape shape);
  ComplexTensor(Shape shape, std::vector<cplx> data);

  static ComplexTensor scalar(cplx value);
  static ComplexTensor from_matrix(const Eigen::MatrixXcd& m);
  static ComplexTensor from_vector(const Eigen::VectorXcd& v);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }

  std::span<const cplx> data() const { return data_; }
  std::span<cplx> data() { return data_; }
  const std::vector<cplx>& values() const { return data_; }

  std::size_t offset(std::span<const std::size_t> index) const;
  cplx& at(std::span<const std::size_t> index) { return data_[offset(index)]; }
  cplx at(std::span<const std::size_t> index) const { return data_[offset(index)]; }
  cplx& operator()(std::initializer_list<std::size_t> index) {
    return at(std::span<const std::size_t>(index.begin(), index.size()));
  }
  cplx operator()(std::initializer_list<std::size_t> index) const {
    return at(std::span<const std::size_t>(index.begin(), index.size()));
  }

  ComplexTensor reshape(Shape shape) const;
  ComplexTensor permute(std::span<const std::size_t> perm) const;
  ComplexTensor permute(std::initializer_list<std::size_t> perm) const {
    return permute(std::span<const std::size_t>(perm.begin(), perm.size()));
  }
  ComplexTensor conj() const;

  // Groups the first `row_axes` axes into the row index.
  Eigen::MatrixXcd as_matrix(std::size_t row_axes) const;
  Eigen::VectorXcd as_vector() const;

  double frobenius_norm() const;
  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<cplx> data_;
};

std::size_t shape_product(const Shape& shape);

// Sums over each (axis of a, axis of b) pair; the result keeps the unpaired axes of a then b.
ComplexTensor contract(const ComplexTensor& a, const ComplexTensor& b,
                       std::span<const std::pair<std::size_t, std::size_t>> axis_pairs);
inline ComplexTensor contract(const ComplexTensor& a, const ComplexTensor& b,
                              std::initializer_list<std::pair<std::size_t, std::size_t>> pairs) {
  return contract(a, b, std::span<const std::pair<std::size_t, std::size_t>>(pairs.begin(), pairs.size()));
}

struct TruncationPolicy {
  double rel_threshold = 0.0;          // drop S_i / S_0 < rel_threshold
  std::optional<std::size_t> max_rank;
  void validate() const;
};

// Singular values at or below this multiple of eps * S_0 count as zero.
inline constexpr double kSingularClampFactor = 1e2;

struct SvdResult {
  Eigen::MatrixXcd u;    // m x r
  std::vector<double> s; // descending
  Eigen::MatrixXcd vh;   // r x n
  double discarded_weight = 0.0;
  std::size_t full_rank = 0;  // rank before truncation
};

// Number of singular values kept under `policy`; always at least 1 when s[0] > 0.
std::size_t kept_rank(std::span<const double> s, const TruncationPolicy& policy);

SvdResult svd_truncated(const Eigen::MatrixXcd& m, const TruncationPolicy& policy);
SvdResult svd_truncated(const ComplexTensor& m, const TruncationPolicy& policy);

struct QrResult {
  Eigen::MatrixXcd q;  // m x min(m, n), orthonormal columns
  Eigen::MatrixXcd r;  // min(m, n) x n, upper triangular
};
QrResult qr(const Eigen::MatrixXcd& m);

}  // namespace setn
