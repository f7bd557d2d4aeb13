#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rpkf/linalg.hpp"

namespace rpkf::cli {

/// A header row plus data rows of raw cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// 17 significant digits, so a write/read cycle reproduces the double.
std::string format_double(double v);

/// Parses a whole cell as a double; throws std::runtime_error otherwise.
double parse_double(const std::string& cell);

void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Throws std::runtime_error on I/O failure or ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

/// Reads a measurement file with header y1..yN and N columns per row.
std::vector<Vector> read_measurements(const std::filesystem::path& path, Eigen::Index dim);

void write_measurements(const std::filesystem::path& path, const std::vector<Vector>& ys);

}  // namespace rpkf::cli
