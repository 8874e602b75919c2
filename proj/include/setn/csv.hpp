#pragma once

#include <string>
#include <utility>
#include <vector>

#include "setn/config.hpp"
#include "setn/sff.hpp"

namespace setn {

// '#'-prefixed metadata block followed by a plain CSV body:
//   # artifact = setn <version>
//   # config.<key> = <value>     (full config echo)
//   # result.<name> = <value>
//   col1,col2,...
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> meta;  // keys with their prefix
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  const std::string* meta_value(const std::string& key) const;
  std::size_t column(const std::string& name) const;
};

std::string format_number(double x);

std::string render_csv(const ExperimentConfig& config, const std::vector<std::pair<std::string, std::string>>& results,
                       const std::vector<std::string>& columns, const std::vector<std::vector<std::string>>& rows);
void write_text(const std::string& path, const std::string& text);

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

// Rebuilds the config from the config.* metadata.
ExperimentConfig config_from_table(const CsvTable& table);

// SFF export columns: t, K, stderr, L, method, realizations, seed.
std::vector<std::string> sff_columns();
std::vector<std::vector<std::string>> sff_rows(const SffSeries& s);
SffSeries sff_from_table(const CsvTable& table);

}  // namespace setn
