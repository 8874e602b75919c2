#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "setn/config.hpp"

namespace setn {

std::vector<std::string> command_names();

// Runs the configured subcommand and returns the CSV text. Throws on failure.
std::string run_command(const ExperimentConfig& config);

// Exit status 0 on success, 2 on a configuration error, 3 on a numerical failure. Output goes
// to config.out (stdout when empty); numerical failures leave a diagnostic file next to it.
int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

std::string diagnostic_path(const ExperimentConfig& config);

}  // namespace setn
