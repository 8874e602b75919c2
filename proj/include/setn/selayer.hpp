#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "setn/disorder.hpp"
#include "setn/tensor.hpp"

namespace setn {

// Doubled per-step index c = 2*j + j', j the forward (unprimed) and j' the backward
// (primed) spin label, 0 <-> +1. Realization h contributes the phase
// exp(i tau h (sigma' - sigma)), i.e. (1, e^{-2ih tau}, e^{+2ih tau}, 1).
cplx layer_phase(double h, double tau, int c);

// Configuration index for a dense O matrix entry (l', l) -> flattened doubled index
// sum_p c_p 4^{n-p}.
std::uint64_t doubled_index(std::uint64_t lp, std::uint64_t l, int n);

// MPO sum over realizations, kept implicit: bond index j enumerates the batch.
struct UncompressedLayer {
  std::vector<double> fields;
  double tau = 0.0;
  int steps = 0;

  std::size_t bond_dim() const { return fields.size(); }
  // (1/M) sum_j prod_p phase_j(c_p)
  cplx entry(std::span<const int> c) const;
  Eigen::MatrixXcd dense_matrix() const;  // 2^n x 2^n, rows l'
};

UncompressedLayer build_se_layer(const RealizationBatch& batch, int n, double tau);

struct SeLayerChain {
  // Core p has shape (bond_{p-1}, 4, bond_p) and is a left isometry over (bond_{p-1}, c).
  std::vector<ComplexTensor> cores;
  // Averaged layer truncated after step p: exp(log_scales[p-1]) * cores[0..p) * terminals[p-1].
  std::vector<Eigen::VectorXcd> terminals;
  std::vector<double> log_scales;
  // Kept singular values of step p divided by the largest one, and log of the largest one
  // for the unnormalized sum over realizations.
  std::vector<std::vector<double>> spectra;
  std::vector<double> log_s0;
  std::vector<double> discarded;
  std::vector<std::size_t> bond_dims;

  double tau = 0.0;
  DisorderSpec spec;
  std::size_t realizations = 0;
  std::uint64_t seed = 0;
  TruncationPolicy policy;
  std::size_t peak_aux_numbers = 0;

  int steps() const { return static_cast<int>(cores.size()); }
  std::size_t max_bond() const;
  // 1 - prod_p (1 - w_p) over the first `prefix` steps (all steps when prefix < 0).
  double total_discarded_weight(int prefix = -1) const;
  // Prefix of length m as MPS cores (bond, 4, bond) with open ends and the scale spread evenly.
  std::vector<ComplexTensor> weight_cores(int m) const;
  Eigen::VectorXcd dense_vector(int m) const;   // 4^m entries
  Eigen::MatrixXcd dense_matrix(int m) const;   // 2^m x 2^m, rows l'
};

// Memory-light sweep: keeps S V (chi x M) and the per-realization phase tables only.
SeLayerChain compress_streaming(const RealizationBatch& batch, int n, double tau, const TruncationPolicy& policy);

// Direct procedure over explicitly stored bond-M cores; used as a cross-check for small n.
inline constexpr int kNaiveMaxSteps = 10;
inline constexpr std::size_t kNaiveMaxCoreEntries = std::size_t{1} << 26;
SeLayerChain compress_naive(const RealizationBatch& batch, int n, double tau, const TruncationPolicy& policy);

struct SpectrumSeries {
  std::vector<double> times;
  std::vector<std::vector<double>> ratios;  // (S_i / S_0)^2, i = 0 first
};

SpectrumSeries spectrum_series(const SeLayerChain& chain);

struct ScalingFit {
  int index = 0;        // ratio index i >= 1
  double c = 0.0;       // ratio_i ~ c * x^i, x = alpha^2 tau t
  double residual = 0.0;  // rms of log residuals at fixed slope i
  double slope = 0.0;   // free log-log slope
  std::size_t points = 0;
};

inline constexpr double kPerturbativeWindow = 0.05;
std::vector<ScalingFit> fit_scaling_coefficients(const SpectrumSeries& series, double alpha, double tau,
                                                 double x_max = kPerturbativeWindow, double x_min = 0.0);

struct PredictedRatios {
  double r2 = 0.0;  // E_2 / E_1
  double r3 = 0.0;  // E_3 / E_1
  bool perturbative = true;
};

// Ratios of the three leading eigenvalues of the averaged density matrix after n+1 steps.
PredictedRatios predicted_ratios(int n, double alpha, double tau);

struct EncodingCheck {
  double margin = 0.0;
  bool pass = false;
};
EncodingCheck encoding_criterion(double n, double alpha, double t, double required_margin = 100.0);

}  // namespace setn
