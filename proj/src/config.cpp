#include "setn/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "setn/errors.hpp"

namespace setn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

// Shortest round-trip representation.
std::string fmt(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double to_double(const std::string& v, const std::string& where) {
  double x = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(x))
    throw ConfigError(where + ": expected a number, got '" + v + "'");
  return x;
}

template <class Int>
Int to_int(const std::string& v, const std::string& where) {
  Int x = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError(where + ": expected an integer, got '" + v + "'");
  return x;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<T, double>) {
      out += fmt(v[i]);
    } else if constexpr (std::is_same_v<T, std::string>) {
      out += v[i];
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& kv : config_echo(ExperimentConfig{})) keys.push_back(kv.first);
  return keys;
}

void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& raw, const std::string& where) {
  const std::string v = trim(raw);
  const std::string at = where + ": " + key;
  if (key == "command") c.command = v;
  else if (key == "J") c.model.J = to_double(v, at);
  else if (key == "b") c.model.b = to_double(v, at);
  else if (key == "disorder") {
    try {
      c.model.spec.kind = parse_disorder_kind(v);
    } catch (const std::exception& e) {
      throw ConfigError(at + ": " + e.what());
    }
  } else if (key == "alpha") c.model.spec.strength = to_double(v, at);
  else if (key == "tau") c.model.tau = to_double(v, at);
  else if (key == "steps") c.model.n = to_int<int>(v, at);
  else if (key == "sites") c.model.L = to_int<int>(v, at);
  else if (key == "threshold") c.threshold = to_double(v, at);
  else if (key == "max_bond") c.max_bond = to_int<std::size_t>(v, at);
  else if (key == "realizations") c.realizations = to_int<std::size_t>(v, at);
  else if (key == "seed") c.seed = to_int<std::uint64_t>(v, at);
  else if (key == "threads") c.threads = to_int<int>(v, at);
  else if (key == "t_min") c.t_min = to_double(v, at);
  else if (key == "t_max") c.t_max = to_double(v, at);
  else if (key == "t_step") c.t_step = to_double(v, at);
  else if (key == "out") c.out = v;
  else if (key == "sizes") {
    c.sizes.clear();
    for (const auto& s : split_list(v)) c.sizes.push_back(to_int<int>(s, at));
  } else if (key == "alphas") {
    c.alphas.clear();
    for (const auto& s : split_list(v)) c.alphas.push_back(to_double(s, at));
  } else if (key == "nodes") c.nodes = to_int<int>(v, at);
  else if (key == "window_lo") c.window_lo = to_double(v, at);
  else if (key == "window_hi") c.window_hi = to_double(v, at);
  else if (key == "eig_method") c.eig_method = v;
  else if (key == "eig_count") c.eig_count = to_int<int>(v, at);
  else if (key == "chi_d") c.chi_d = to_int<std::size_t>(v, at);
  else if (key == "layer") c.layer = v;
  else if (key == "inputs") c.inputs = split_list(v);
  else if (key == "toy_threshold") c.toy_threshold = to_double(v, at);
  else if (key == "fit_window") c.fit_window = to_double(v, at);
  else throw ConfigError(where + ": unknown key '" + key + "'");
}

ExperimentConfig parse_config(const std::string& text, const std::string& source, ExperimentConfig base) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": missing key");
    set_config_value(base, key, body.substr(eq + 1), where);
  }
  return base;
}

std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& c) {
  return {
      {"command", c.command},
      {"J", fmt(c.model.J)},
      {"b", fmt(c.model.b)},
      {"disorder", to_string(c.model.spec.kind)},
      {"alpha", fmt(c.model.spec.strength)},
      {"tau", fmt(c.model.tau)},
      {"steps", std::to_string(c.model.n)},
      {"sites", std::to_string(c.model.L)},
      {"threshold", fmt(c.threshold)},
      {"max_bond", std::to_string(c.max_bond)},
      {"realizations", std::to_string(c.realizations)},
      {"seed", std::to_string(c.seed)},
      {"threads", std::to_string(c.threads)},
      {"t_min", fmt(c.t_min)},
      {"t_max", fmt(c.t_max)},
      {"t_step", fmt(c.t_step)},
      {"out", c.out},
      {"sizes", join(c.sizes)},
      {"alphas", join(c.alphas)},
      {"nodes", std::to_string(c.nodes)},
      {"window_lo", fmt(c.window_lo)},
      {"window_hi", fmt(c.window_hi)},
      {"eig_method", c.eig_method},
      {"eig_count", std::to_string(c.eig_count)},
      {"chi_d", std::to_string(c.chi_d)},
      {"layer", c.layer},
      {"inputs", join(c.inputs)},
      {"toy_threshold", fmt(c.toy_threshold)},
      {"fit_window", fmt(c.fit_window)},
  };
}

TruncationPolicy ExperimentConfig::policy() const {
  TruncationPolicy p{threshold, std::nullopt};
  if (max_bond > 0) p.max_rank = max_bond;
  return p;
}

std::vector<double> ExperimentConfig::time_grid() const {
  std::vector<double> t;
  const auto count = static_cast<std::size_t>(std::floor((t_max - t_min) / t_step + 1e-9)) + 1;
  for (std::size_t k = 0; k < count; ++k) t.push_back(t_min + static_cast<double>(k) * t_step);
  return t;
}

void ExperimentConfig::validate() const {
  try {
    model.validate();
    policy().validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (realizations < 1) throw ConfigError("realizations must be at least 1");
  if (threads < 0) throw ConfigError("threads must be non-negative");
  if (!(t_step > 0.0)) throw ConfigError("t_step must be positive");
  if (!(t_min >= 0.0) || !(t_max >= t_min)) throw ConfigError("time grid needs 0 <= t_min <= t_max");
  if (eig_method != "krylov" && eig_method != "dmrg") throw ConfigError("eig_method must be krylov or dmrg");
  if (layer != "sampled" && layer != "analytic") throw ConfigError("layer must be sampled or analytic");
  if (eig_count < 1) throw ConfigError("eig_count must be at least 1");
  if (!(window_lo < window_hi)) throw ConfigError("window_lo must be below window_hi");
}

}  // namespace setn
