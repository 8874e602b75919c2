#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "setn/model.hpp"
#include "setn/tensor.hpp"

namespace setn {

inline constexpr const char* kArtifactVersion = "0.1.0";

// Every recognised key. Grammar of a config file, one entry per line:
//   key = value        # trailing comments allowed
// Blank lines and lines starting with '#' are ignored. Lists are comma separated.
struct ExperimentConfig {
  std::string command;
  ModelParams model;             // J, b, disorder, alpha, tau, steps, sites
  double threshold = 1e-10;
  std::size_t max_bond = 0;      // 0: unbounded
  std::size_t realizations = 1000;
  std::uint64_t seed = 1;
  int threads = 0;
  double t_min = 0.0;
  double t_max = 10.0;
  double t_step = 0.1;
  std::string out;
  std::vector<int> sizes;        // system sizes (fit-lambda inputs order, toy sizes)
  std::vector<double> alphas;    // levels
  int nodes = 32;                // sff-exact4
  double window_lo = 20.0;
  double window_hi = 90.0;
  std::string eig_method = "krylov";
  int eig_count = 1;
  std::size_t chi_d = 16;
  std::string layer = "sampled"; // transfer-eig: sampled | analytic
  std::vector<std::string> inputs;
  double toy_threshold = 0.1;
  double fit_window = 0.05;      // spectrum: upper end of alpha^2 tau t used in the fits

  TruncationPolicy policy() const;
  std::vector<double> time_grid() const;
  void validate() const;
};

// Rejects unknown keys and malformed values with "source:line: message".
ExperimentConfig parse_config(const std::string& text, const std::string& source,
                              ExperimentConfig base = ExperimentConfig{});
// Sets one key; `where` prefixes error messages.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value,
                      const std::string& where);
// Ordered key/value echo; parse_config of the echo reproduces the config.
std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& config);

std::vector<std::string> config_keys();

}  // namespace setn
