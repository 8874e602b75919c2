#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "setn/commands.hpp"
#include "setn/config.hpp"
#include "setn/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Disorder-averaged spectral form factor toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  // flag name -> config key
  const std::vector<std::pair<std::string, std::string>> flags = {
      {"seed", "seed"},       {"threads", "threads"},     {"out", "out"},
      {"alpha", "alpha"},     {"tau", "tau"},             {"steps", "steps"},
      {"sites", "sites"},     {"realizations", "realizations"}, {"threshold", "threshold"},
      {"max-bond", "max_bond"}};
  std::map<std::string, std::string> values;

  app.add_option("--config", config_path, "key = value configuration file");
  for (const auto& [flag, key] : flags) app.add_option("--" + flag, values[key], "sets '" + key + "'");
  app.add_option("--set", overrides, "any configuration key as key=value (repeatable)");
  const std::map<std::string, std::string> about = {
      {"spectrum", "per-step singular spectrum of the compressed statistics layer and scaling fits"},
      {"sff-ed", "disorder-averaged SFF by exact diagonalization"},
      {"sff-exact4", "L = 4 SFF by Gauss-Legendre quadrature over the fields"},
      {"sff-setn", "SFF from the compressed statistics layer and the transfer network"},
      {"transfer-eig", "leading transfer-matrix eigenvalues versus time"},
      {"levels", "mean level spacing ratio versus disorder strength"},
      {"fit-lambda", "lambda(t) from SFF tables at several sizes"},
      {"thouless", "Thouless time estimates from SFF tables"},
      {"toy", "toy-model SFF and dominance times"}};
  for (const auto& name : setn::command_names()) app.add_subcommand(name, about.at(name))->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  setn::ExperimentConfig config;
  try {
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw setn::ConfigError("cannot open config file '" + config_path + "'");
      std::stringstream ss;
      ss << f.rdbuf();
      config = setn::parse_config(ss.str(), config_path);
    }
    config.command = app.get_subcommands().front()->get_name();
    for (const auto& [flag, key] : flags)
      if (app.count("--" + flag) > 0) setn::set_config_value(config, key, values[key], "--" + flag);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw setn::ConfigError("--set " + kv + ": expected key=value");
      setn::set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1), "--set");
    }
  } catch (const setn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  return setn::run(config, std::cout, std::cerr);
}
