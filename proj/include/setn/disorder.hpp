#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "setn/tensor.hpp"

namespace setn {

enum class DisorderKind { Uniform, Gaussian };

std::string to_string(DisorderKind kind);
DisorderKind parse_disorder_kind(const std::string& text);

// Uniform: h in [-strength, strength]. Gaussian: standard deviation `strength`.
// strength = 0 is accepted as the clean limit.
struct DisorderSpec {
  DisorderKind kind = DisorderKind::Uniform;
  double strength = 0.5;
  void validate() const;
};

struct RealizationBatch {
  std::vector<double> values;
  std::uint64_t seed = 0;
  DisorderSpec spec;
};

// +1 / -1 labels, one per Trotter step; label index 1 maps to +1.
using SignVector = std::vector<int>;

// Deterministic stream for (seed, task). mt19937_64 seeded through seed_seq.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t task);
  std::uint64_t next_u64();
  double uniform01();          // [0, 1), 53-bit
  double uniform(double lo, double hi);
  double normal();             // Box-Muller, cached second draw
  double draw(const DisorderSpec& spec);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Realizations are generated in chunks of this size, chunk c on stream (seed, c).
inline constexpr std::size_t kSampleChunk = 4096;

RealizationBatch sample(const DisorderSpec& spec, std::size_t m, std::uint64_t seed);

std::array<cplx, 2> phase_vector(double h, double tau);

double sinc(double x);

// Average of exp(i tau h delta) under spec.
double characteristic(const DisorderSpec& spec, double tau, double delta);

double analytic_o_entry(const SignVector& sp, const SignVector& s, const DisorderSpec& spec, double tau);

// Rows index l' (primed), columns l. Configuration index bit (n-p) is step p; bit 0 <-> +1.
inline constexpr int kMaxDenseOSteps = 12;
Eigen::MatrixXd dense_o_matrix(int n, const DisorderSpec& spec, double tau);
Eigen::MatrixXcd monte_carlo_o(int n, const RealizationBatch& batch, double tau);

SignVector signs_from_index(std::uint64_t index, int n);

}  // namespace setn
