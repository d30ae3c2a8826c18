#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "asvlab/common.hpp"

namespace asv {

/// Numeric table with a named header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

/// Parse a comma-separated numeric table. Throws CsvError with file/line
/// context on ragged rows, non-numeric cells, or an empty file. If
/// `expected_header` is non-empty the header must match it exactly.
CsvTable read_csv(const std::filesystem::path& path,
                  const std::vector<std::string>& expected_header = {});

/// Write a numeric table. Values are emitted with enough digits to
/// round-trip a double exactly.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::string format_double(double v);

}  // namespace asv
