#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace maxqed::cli {

/// CSV file whose first line is `# config_hash=<hash> units=<units> command=<cmd>`
/// and whose second line names the columns. Rows must match the header width.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& config_hash,
            const std::string& units, const std::string& command,
            std::vector<std::string> columns);

  void row(std::span<const double> values);
  void row(std::initializer_list<double> values) { row(std::span(values.begin(), values.size())); }

  const std::filesystem::path& path() const { return path_; }
  std::size_t rows() const { return rows_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t width_;
  std::size_t rows_ = 0;
};

}  // namespace maxqed::cli
