#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "setn/disorder.hpp"
#include "setn/model.hpp"
#include "setn/sff.hpp"

namespace setn {

inline constexpr int kMaxEdSites = 16;
// Dense storage cap for one Hamiltonian (bytes); L = 15, 16 exceed it on ordinary hosts.
inline constexpr std::size_t kMaxEdBytes = std::size_t{3} << 30;

// Real symmetric in the sz basis (bit 0 <-> +1, site 1 most significant).
struct DenseHamiltonian {
  Eigen::MatrixXd matrix;
  ModelParams params;
  std::vector<double> fields;
  std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }
};

DenseHamiltonian build_hamiltonian(const ModelParams& params, std::span<const double> h);

// Ascending eigenvalues. Every call counts as one diagonalization.
Eigen::VectorXd spectrum(const DenseHamiltonian& h);
std::uint64_t diagonalization_count();

// |sum_k exp(-i E_k t)|^2 at each time; uniform grids use a phase recurrence.
std::vector<double> sff_from_spectrum(const Eigen::VectorXd& energies, std::span<const double> times);
std::vector<double> sff_single(const DenseHamiltonian& h, std::span<const double> times);

struct AverageOptions {
  int threads = 0;              // 0: hardware concurrency
  std::size_t first = 0;        // index of the first realization (stream task id)
};

// Realization r draws its L fields from RandomStream(seed, r).
std::vector<double> realization_fields(const ModelParams& params, std::uint64_t seed, std::size_t r);

SffSeries sff_averaged(const ModelParams& params, std::span<const double> times, std::size_t m, std::uint64_t seed,
                       const AverageOptions& options = {});

// Tensor-product Gauss-Legendre average over uniform fields on [-alpha, alpha]^4.
SffSeries sff_quadrature_L4(const ModelParams& params, std::span<const double> times, int nodes_per_dim);

// |Tr U^n|^2 for the Trotter step of the model (L <= 10).
inline constexpr int kMaxTrotterSites = 10;
std::vector<double> sff_trotter(const ModelParams& params, std::span<const double> h, std::span<const int> steps);

// Average of |Tr U^n|^2 when every site draws independently from the batch values, i.e. the
// mean over all M^L field tuples. Tr U^n is a trigonometric polynomial of degree n in each
// field, so its coefficients follow from (n+1)^L samples and the tuple average factorizes.
SffSeries sff_trotter_batch(const ModelParams& params, const RealizationBatch& batch, std::span<const int> steps);
// Same with the exact average over params.spec.
SffSeries sff_trotter_analytic(const ModelParams& params, std::span<const int> steps);

struct SpacingRatio {
  double mean = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;  // ratios dropped because a gap was degenerate
};

SpacingRatio level_spacing_ratio(std::span<const double> energies);

// Mean over realizations of the per-realization <r>.
struct RatioAverage {
  double mean = 0.0;
  double stderr_of_mean = 0.0;
  std::size_t realizations = 0;
  std::size_t skipped = 0;
};
RatioAverage averaged_spacing_ratio(const ModelParams& params, std::size_t m, std::uint64_t seed,
                                    const AverageOptions& options = {});

double goe_sff_reference(double t, double d);

}  // namespace setn
