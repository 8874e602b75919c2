#pragma once

#include <array>
#include <span>

#include <Eigen/Dense>

#include "setn/disorder.hpp"
#include "setn/tensor.hpp"

namespace setn {

// H = J sum_{i<L} sz_i sz_{i+1} + b sum_i sx_i + sum_i h_i sz_i, open chain, hbar = 1.
struct ModelParams {
  double J = 1.0;
  double b = 1.0;
  DisorderSpec spec;
  double tau = 0.005;
  int n = 1;
  int L = 4;

  void validate() const;
  double t() const { return n * tau; }
};

// One Trotter step is U = X * ZZ * Zh with
//   Zh = prod_i exp(-i tau h_i sz_i), ZZ = prod_i exp(-i tau J sz_i sz_{i+1}), X = prod_i exp(-i tau b sx_i).
// Spin basis: bit 0 <-> sz = +1; in multi-site states site 1 is the most significant bit.
struct GateSet {
  Eigen::Matrix4cd two_site;  // exp(-i tau J sz sz), rows (out_i, out_{i+1}), cols (in_i, in_{i+1})
  Eigen::Matrix2cd one_site;  // exp(-i tau b sx), rows out
  ComplexTensor vl;           // (in_i, out_i, k)
  ComplexTensor vr;           // (k, in_{i+1}, out_{i+1})
  std::size_t chi_g = 0;
  Eigen::Matrix2cd u1;        // (u1)_{k k'} = exp(-i tau J s_k s_k')
  Eigen::Matrix2cd u2;        // on-site gate applied after the diagonal layers (= one_site)
};

GateSet build_gates(const ModelParams& params);

struct GateSplit {
  ComplexTensor vl;  // (2, 2, chi)
  ComplexTensor vr;  // (chi, 2, 2)
  std::size_t chi = 0;
};

// sum_k vl(i1, o1, k) vr(k, i2, o2) = gate(o1 o2, i1 i2); chi is the numerical rank at 1e-12.
GateSplit split_two_site_gate(const Eigen::Matrix4cd& gate);

struct DisorderFactor {
  Eigen::Matrix2cd u;
  std::array<cplx, 2> v;
};

// exp(-i tau h Hi) = u diag(v) u^dagger.
DisorderFactor factor_general_disorder(const Eigen::Matrix2cd& hi, double h, double tau);

enum class ColumnEdge { Bulk, Left, Right };

// Axes (j_n, j_{n+1}, k_{n-1}, k_n, l), extents (2, 2, chi_l, chi_r, 2). Edge columns use a
// trivial bond of extent 1 on the outer side.
struct WTensor {
  ComplexTensor data;
  ColumnEdge edge = ColumnEdge::Bulk;
};

WTensor build_w_tensor(const GateSet& gates, ColumnEdge edge = ColumnEdge::Bulk);

struct FastGates {
  ComplexTensor delta5;  // five-index Kronecker delta, extents 2
  Eigen::Matrix2cd u1;
  Eigen::Matrix2cd u2;
};

FastGates build_fast_gates(const ModelParams& params);

// Dense 2^L x 2^L single Trotter step for fields h.
Eigen::MatrixXcd trotter_step(const ModelParams& params, std::span<const double> h);

// Dense matrices of the three layers, for oracles.
Eigen::MatrixXcd pauli_sum_matrix(int L, char which);      // sum_i s_i
Eigen::MatrixXcd zz_sum_matrix(int L);                      // sum_{i<L} z_i z_{i+1}
Eigen::MatrixXcd field_matrix(std::span<const double> h);  // sum_i h_i z_i

}  // namespace setn
