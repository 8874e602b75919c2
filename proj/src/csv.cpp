#include "setn/csv.hpp"

#include <charconv>
#include <fstream>
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

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

double parse_number(const std::string& s) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("csv: bad number '" + s + "'");
  return x;
}

}  // namespace

const std::string* CsvTable::meta_value(const std::string& key) const {
  for (const auto& kv : meta)
    if (kv.first == key) return &kv.second;
  return nullptr;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw ConfigError("csv: missing column '" + name + "'");
}

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string render_csv(const ExperimentConfig& config, const std::vector<std::pair<std::string, std::string>>& results,
                       const std::vector<std::string>& columns, const std::vector<std::vector<std::string>>& rows) {
  std::string out = "# artifact = setn " + std::string(kArtifactVersion) + "\n";
  for (const auto& [k, v] : config_echo(config)) out += "# config." + k + " = " + v + "\n";
  for (const auto& [k, v] : results) out += "# result." + k + " = " + v + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += "\n";
  for (const auto& row : rows) {
    if (row.size() != columns.size()) throw DimensionError("csv: row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += "\n";
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw ConfigError("failed writing '" + path + "'");
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::stringstream ss(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) t.meta.emplace_back(trim(line.substr(1, eq - 1)), trim(line.substr(eq + 1)));
      continue;
    }
    if (!header_seen) {
      t.columns = split(line);
      header_seen = true;
    } else {
      t.rows.push_back(split(line));
      if (t.rows.back().size() != t.columns.size()) throw DimensionError("csv: row width differs from header");
    }
  }
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

ExperimentConfig config_from_table(const CsvTable& table) {
  ExperimentConfig c;
  const std::string prefix = "config.";
  for (const auto& [k, v] : table.meta)
    if (k.rfind(prefix, 0) == 0) set_config_value(c, k.substr(prefix.size()), v, "header");
  return c;
}

std::vector<std::string> sff_columns() { return {"t", "K", "stderr", "L", "method", "realizations", "seed"}; }

std::vector<std::vector<std::string>> sff_rows(const SffSeries& s) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < s.times.size(); ++k)
    rows.push_back({format_number(s.times[k]), format_number(s.values[k]),
                    s.stderr_of_mean.empty() ? "0" : format_number(s.stderr_of_mean[k]), std::to_string(s.L), s.method,
                    std::to_string(s.realizations), std::to_string(s.seed)});
  return rows;
}

SffSeries sff_from_table(const CsvTable& table) {
  SffSeries s;
  const std::size_t ct = table.column("t"), ck = table.column("K"), ce = table.column("stderr"),
                    cl = table.column("L"), cm = table.column("method"), cr = table.column("realizations"),
                    cs = table.column("seed");
  for (const auto& row : table.rows) {
    s.times.push_back(parse_number(row[ct]));
    s.values.push_back(parse_number(row[ck]));
    s.stderr_of_mean.push_back(parse_number(row[ce]));
    s.L = static_cast<int>(parse_number(row[cl]));
    s.method = row[cm];
    s.realizations = static_cast<std::size_t>(parse_number(row[cr]));
    s.seed = std::stoull(row[cs]);
  }
  return s;
}

}  // namespace setn
