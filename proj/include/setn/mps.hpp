#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "setn/tensor.hpp"

namespace setn {

// Open-boundary matrix product state; site tensors have axes (left bond, physical, right bond).
struct Mps {
  std::vector<ComplexTensor> sites;

  int length() const { return static_cast<int>(sites.size()); }
  std::size_t phys_dim() const { return sites.empty() ? 0 : sites[0].extent(1); }
  std::size_t max_bond() const;

  static Mps product(int length, const Eigen::VectorXcd& local);
  static Mps random(int length, std::size_t phys, std::size_t bond, std::uint64_t seed);
  // Exact (up to policy) successive-SVD decomposition of a dense vector of phys^length entries.
  static Mps from_dense(const Eigen::VectorXcd& v, int length, std::size_t phys, const TruncationPolicy& policy);

  Eigen::VectorXcd to_dense() const;
};

// <a|b> with a conjugated.
cplx overlap(const Mps& a, const Mps& b);
double norm(const Mps& a);
// Sum of all entries, i.e. overlap with the all-ones product state.
cplx total_sum(const Mps& a);

void scale(Mps& a, cplx factor);

// Same local operator on every site: site tensor s(a, c, b) -> sum_c' op(c, c') s(a, c', b).
void apply_site_operator(Mps& a, const Eigen::MatrixXcd& op);

// Entrywise product of the represented vectors (bond dimensions multiply).
Mps hadamard(const Mps& a, const std::vector<ComplexTensor>& weight);

// Entrywise product followed by left-to-right truncation of the product bonds
// (zip-up), then a standard compression sweep. Returns summed discarded weight.
double hadamard_compressed(Mps& a, const std::vector<ComplexTensor>& weight, const TruncationPolicy& policy);

// Left-canonicalise with QR, then truncate right to left. Returns summed discarded weight.
double compress(Mps& a, const TruncationPolicy& policy);

// Right-canonical form (all sites but the first are right isometries).
void right_canonicalize(Mps& a);

// sum_i c_i v_i with compression after each addition; returns summed discarded weight.
Mps linear_combination(const std::vector<cplx>& coeffs, const std::vector<const Mps*>& vecs,
                       const TruncationPolicy& policy, double* discarded = nullptr);

// Matrix product operator with site tensors (left, out, in, right).
struct Mpo {
  std::vector<ComplexTensor> sites;
  int length() const { return static_cast<int>(sites.size()); }
  std::size_t max_bond() const;
  Eigen::MatrixXcd to_dense() const;
};

Mps apply_mpo(const Mpo& op, const Mps& x);

}  // namespace setn
