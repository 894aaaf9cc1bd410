#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "poststab_cli/cli.hpp"
#include "poststab_cli/scenario.hpp"

namespace poststab::cli {

struct CsvTable {
  std::vector<std::string> header_comments;  // written as "# ..." lines
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::string render() const;
};

std::string cell(double v);
std::string cell(bool v);
std::string cell(std::size_t v);

struct OutputFile {
  std::string name;
  std::string content;
};

// Creates dir if needed and writes every file through a temporary name, so a
// failed run never leaves half a report behind.
void write_outputs(const std::string& dir, const std::vector<OutputFile>& files);

// --seed if given, else the scenario's seed (0 by default).
std::uint64_t effective_seed(const Flags& flags, const Scenario& sc);

// Scenario "outputs" entry for key, else fallback.
std::string output_name(const Scenario& sc, const std::string& key, const std::string& fallback);

// The files --format asks for.
std::vector<OutputFile> select_outputs(Format format, OutputFile csv, OutputFile json);

}  // namespace poststab::cli
