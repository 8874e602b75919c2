#pragma once

#include <cstdint>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "setn/disorder.hpp"
#include "setn/tensor.hpp"

namespace setn::testing {

inline Eigen::MatrixXcd random_matrix(RandomStream& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cplx(rng.normal(), rng.normal());
  return m;
}

inline Eigen::VectorXcd random_vector(RandomStream& rng, Eigen::Index n) { return random_matrix(rng, n, 1).col(0); }

inline ComplexTensor random_tensor(RandomStream& rng, Shape shape) {
  ComplexTensor t(shape);
  for (auto& x : t.data()) x = cplx(rng.normal(), rng.normal());
  return t;
}

inline Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a) { return a.exp(); }

inline Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd x;
  x << 0, 1, 1, 0;
  return x;
}

inline Eigen::Matrix2cd pauli_z() {
  Eigen::Matrix2cd z;
  z << 1, 0, 0, -1;
  return z;
}

// Operator `a` on site i (0-based, site 0 most significant) of an L-site chain.
inline Eigen::MatrixXcd on_site(const Eigen::Matrix2cd& a, int i, int L) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (int s = 0; s < L; ++s) {
    const Eigen::MatrixXcd f = s == i ? Eigen::MatrixXcd(a) : Eigen::MatrixXcd::Identity(2, 2);
    Eigen::MatrixXcd next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      for (Eigen::Index c = 0; c < out.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = out(r, c) * f;
    out = next;
  }
  return out;
}

}  // namespace setn::testing
