#include "output.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "poststab/error.hpp"
#include "poststab/io.hpp"

namespace poststab::cli {

namespace {

std::string escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string CsvTable::render() const {
  std::ostringstream os;
  for (const auto& c : header_comments) os << "# " << c << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << escape(columns[i]);
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << escape(r[i]);
    os << '\n';
  }
  return os.str();
}

std::string cell(double v) { return format_number(v); }
std::string cell(bool v) { return v ? "true" : "false"; }
std::string cell(std::size_t v) { return std::to_string(v); }

void write_outputs(const std::string& dir, const std::vector<OutputFile>& files) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Validation, "cannot create output directory " + dir + ": " + ec.message());
  std::vector<fs::path> temps;
  for (const auto& f : files) {
    const fs::path tmp = fs::path(dir) / (f.name + ".tmp");
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    os << f.content;
    os.close();
    if (!os) {
      for (const auto& t : temps) fs::remove(t, ec);
      fs::remove(tmp, ec);
      fail(ErrorCode::Validation, "cannot write " + tmp.string());
    }
    temps.push_back(tmp);
  }
  for (std::size_t i = 0; i < files.size(); ++i) fs::rename(temps[i], fs::path(dir) / files[i].name);
}

std::uint64_t effective_seed(const Flags& flags, const Scenario& sc) { return flags.seed.value_or(sc.seed); }

std::string output_name(const Scenario& sc, const std::string& key, const std::string& fallback) {
  auto it = sc.outputs.find(key);
  return it == sc.outputs.end() ? fallback : it->second;
}

std::vector<OutputFile> select_outputs(Format format, OutputFile csv, OutputFile json) {
  std::vector<OutputFile> out;
  if (format != Format::Json) out.push_back(std::move(csv));
  if (format != Format::Csv) out.push_back(std::move(json));
  return out;
}

}  // namespace poststab::cli
