#include "maxqed/cli/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace maxqed::cli {

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& config_hash,
                     const std::string& units, const std::string& command,
                     std::vector<std::string> columns)
    : path_(path), width_(columns.size()) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path);
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  out_ << "# config_hash=" << config_hash << " units=" << units << " command=" << command
       << '\n';
  for (std::size_t k = 0; k < columns.size(); ++k) out_ << (k ? "," : "") << columns[k];
  out_ << '\n';
}

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != width_) {
    throw std::logic_error("CSV row has " + std::to_string(values.size()) + " values, header " +
                           std::to_string(width_));
  }
  char buf[32];
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", values[k]);
    out_ << (k ? "," : "") << buf;
  }
  out_ << '\n';
  ++rows_;
}

}  // namespace maxqed::cli
