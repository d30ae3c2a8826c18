#include "asvlab/csv.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace asv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable read_csv(const std::filesystem::path& path,
                  const std::vector<std::string>& expected_header) {
  std::ifstream in(path);
  if (!in)
    throw CsvError("cannot open " + path.string());

  CsvTable table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (table.header.empty()) {
      for (auto& c : cells) table.header.push_back(trim(c));
      if (!expected_header.empty() && table.header != expected_header) {
        std::string want;
        for (const auto& h : expected_header)
          want += (want.empty() ? "" : ",") + h;
        throw CsvError(path.string() + ":1: expected header '" + want +
                       "', got '" + trim(line) + "'");
      }
      continue;
    }
    if (cells.size() != table.header.size())
      throw CsvError(path.string() + ":" + std::to_string(lineno) + ": " +
                     std::to_string(cells.size()) + " cells, expected " +
                     std::to_string(table.header.size()));
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string cell = trim(cells[i]);
      const char* begin = cell.data();
      const char* end = begin + cell.size();
      auto [ptr, ec] = std::from_chars(begin, end, row[i]);
      if (ec != std::errc() || ptr != end)
        throw CsvError(path.string() + ":" + std::to_string(lineno) +
                       ": cell '" + cell + "' is not a number");
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty())
    throw CsvError(path.string() + ": empty file");
  return table;
}

std::string format_double(double v) {
  // Shortest representation that parses back to the same double.
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0;
    std::from_chars(buf, buf + std::strlen(buf), back);
    if (back == v) break;
  }
  return buf;
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out)
    throw CsvError("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw CsvError(path.string() + ": row width " +
                     std::to_string(row.size()) + " != header width " +
                     std::to_string(header.size()));
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_double(row[i]);
    out << "\n";
  }
  if (!out.flush())
    throw CsvError("short write to " + path.string());
}

}  // namespace asv
