#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace setn {

// K(t) = <|Tr U(t)|^2>, unnormalised.
struct SffSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> stderr_of_mean;  // empty when not a sampled average
  int L = 0;
  std::size_t realizations = 0;
  std::string method;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

}  // namespace setn
