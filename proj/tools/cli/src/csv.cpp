#include "rpkf/cli/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rpkf::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& cell) {
  if (cell.empty()) throw std::runtime_error("empty numeric cell");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || errno == ERANGE) {
    throw std::runtime_error("not a number: '" + cell + "'");
  }
  return v;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  auto write_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open for reading");
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(table.header.size()) + " columns, got " +
                               std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) throw std::runtime_error(path.string() + ": missing header");
  return table;
}

std::vector<Vector> read_measurements(const std::filesystem::path& path, Eigen::Index dim) {
  const CsvTable table = read_csv(path);
  if (static_cast<Eigen::Index>(table.header.size()) != dim) {
    throw std::runtime_error(path.string() + ": expected " + std::to_string(dim) +
                             " measurement columns, got " + std::to_string(table.header.size()));
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    const std::string want = "y" + std::to_string(i + 1);
    if (table.header[static_cast<std::size_t>(i)] != want) {
      throw std::runtime_error(path.string() + ": header column " + std::to_string(i + 1) +
                               " must be '" + want + "'");
    }
  }
  std::vector<Vector> ys;
  ys.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    Vector y(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      try {
        y(i) = parse_double(table.rows[r][static_cast<std::size_t>(i)]);
      } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": row " + std::to_string(r + 1) + ": " +
                                 e.what());
      }
    }
    ys.push_back(std::move(y));
  }
  return ys;
}

void write_measurements(const std::filesystem::path& path, const std::vector<Vector>& ys) {
  if (ys.empty()) throw std::runtime_error("write_measurements: nothing to write");
  CsvTable table;
  for (Eigen::Index i = 0; i < ys.front().size(); ++i)
    table.header.push_back("y" + std::to_string(i + 1));
  for (const auto& y : ys) {
    std::vector<std::string> row;
    for (Eigen::Index i = 0; i < y.size(); ++i) row.push_back(format_double(y(i)));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

}  // namespace rpkf::cli
