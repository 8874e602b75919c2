#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "setn/model.hpp"
#include "setn/mps.hpp"
#include "setn/selayer.hpp"
#include "setn/sff.hpp"
#include "setn/tensor.hpp"

namespace setn {

inline constexpr int kDenseVectorMaxSteps = 10;
inline constexpr int kDenseTransferMaxSteps = 5;

// Disorder-averaged column transfer matrix in the fast-gate gauge: the bond between
// neighbouring columns carries the spin of the left column at every time step, for both
// layers, so the boundary space has dimension 4^n with doubled index c = 2 j + j' per step.
//   T = diag(C) (u1 (x) u1*)^{(x) n},
//   C(j, j') = prod_m x(j_{m+1}, j_m) conj(x(j'_{m+1}, j'_m)) * O(j', j),   j_{n+1} = j_1,
// where x is the on-site field gate and O the averaged statistics layer.
class TransferOperator {
 public:
  TransferOperator(const ModelParams& params, std::vector<ComplexTensor> layer_cores);

  static TransferOperator from_chain(const ModelParams& params, const SeLayerChain& chain, int n);
  // Exact average over the continuous distribution in params.spec.
  static TransferOperator analytic(const ModelParams& params, int n);
  // Layer given densely over 4^n doubled configurations.
  static TransferOperator from_dense_layer(const ModelParams& params, const Eigen::VectorXcd& layer, int n);

  int steps() const { return n_; }
  std::size_t dim() const;
  const ModelParams& params() const { return params_; }
  const Eigen::Matrix4cd& site_gate() const { return site_gate_; }
  const std::vector<ComplexTensor>& layer_cores() const { return layer_; }

  // Time-ring factor times the layer, as MPS cores over n sites.
  std::vector<ComplexTensor> weight_cores() const;
  // Column weight C over 4^n configurations (n <= 10).
  const Eigen::VectorXcd& dense_weight() const;
  // Weight cores after a compression sweep at kWeightThreshold (cached), and the weight it dropped.
  const Mps& compressed_weight() const;
  double weight_discarded() const;

  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  Mps apply(const Mps& x, const TruncationPolicy& policy, double* discarded = nullptr) const;
  Mpo mpo() const;

 private:
  ModelParams params_;
  int n_ = 0;
  Eigen::Matrix4cd site_gate_;
  std::vector<ComplexTensor> layer_;
  mutable std::optional<Eigen::VectorXcd> dense_weight_;
  mutable std::optional<Mps> compressed_weight_;
  mutable double weight_discarded_ = 0.0;
};

inline constexpr double kWeightThreshold = 1e-13;

// Applies the same 4x4 matrix to each of the n doubled factors of a dense vector.
Eigen::VectorXcd apply_site_gates(const Eigen::VectorXcd& x, const Eigen::Matrix4cd& g, int n);

// Analytic layer O(Delta) as an exact MPS whose bond carries the running phase count.
std::vector<ComplexTensor> analytic_layer_cores(const DisorderSpec& spec, double tau, int n);

// Forward and backward time rings of the on-site gate as an MPS with bond 16.
std::vector<ComplexTensor> ring_cores(const Eigen::Matrix2cd& x, int n);

Eigen::MatrixXcd dense_transfer(const TransferOperator& op);

enum class EigMethod { Krylov, Dmrg, Dense };
std::string to_string(EigMethod method);

struct EigResult {
  std::vector<cplx> eigenvalues;  // descending magnitude
  std::vector<double> residuals;
  EigMethod method = EigMethod::Dense;
  bool converged = true;
  std::size_t bond_dim = 0;
  int iterations = 0;
  double discarded_weight = 0.0;
};

EigResult dense_eigs(const TransferOperator& op, int k);

struct KrylovSettings {
  int k = 1;
  double tol = 1e-10;
  int max_basis = 24;
  int max_restarts = 300;
  std::uint64_t seed = 1;
  // Used once n exceeds the dense-vector limit, or always when mps_vectors is set.
  TruncationPolicy mps_policy{1e-10, 64};
  bool mps_vectors = false;
};

EigResult leading_eigs_krylov(const TransferOperator& op, const KrylovSettings& settings);

struct DmrgState {
  Mps mps;
  std::size_t chi_D = 0;
  cplx eigenvalue = 0.0;
  std::optional<cplx> previous;
  std::vector<cplx> history;  // estimate after each sweep
};

struct DmrgSettings {
  std::size_t chi_D = 16;
  int sweeps = 30;
  double tol = 1e-10;
  std::uint64_t seed = 1;
  int candidates = 4;
};

struct DmrgOutcome {
  EigResult result;
  DmrgState state;
};

// Among candidates, the closest to `previous` with magnitude not below it; without a
// previous value, the largest magnitude. Ties within 1e-12 prefer larger magnitude, then
// larger real part. Falls back to the closest overall when no candidate has larger magnitude.
cplx select_tracked_eigenvalue(std::span<const cplx> candidates, std::optional<cplx> previous);

DmrgOutcome leading_eig_dmrg(const TransferOperator& op, const DmrgSettings& settings);

struct NetworkOptions {
  std::vector<int> steps;           // Trotter step counts to evaluate; empty = 0..chain length
  double discarded_bound = 1e-6;    // above this the series gets a warning
};

// K(t) of an L-column chain with trace closure in time, column by column.
SffSeries sff_via_network(const ModelParams& params, const SeLayerChain& chain, const TruncationPolicy& policy,
                          const NetworkOptions& options = {});

// Same contraction for a single operator (any layer source).
struct NetworkValue {
  double k = 0.0;
  double imag = 0.0;
  double discarded = 0.0;
};
NetworkValue network_sff_value(const TransferOperator& op, int L, const TruncationPolicy& policy);

}  // namespace setn
