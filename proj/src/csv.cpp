#include "ggeval/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ggeval/error.hpp"

namespace ggeval {

namespace {

bool ParseRow(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::size_t begin = 0;
  while (begin <= line.size()) {
    std::size_t end = line.find(',', begin);
    if (end == std::string::npos) end = line.size();
    std::size_t a = begin;
    std::size_t b = end;
    while (a < b && (line[a] == ' ' || line[a] == '\t')) ++a;
    while (b > a && (line[b - 1] == ' ' || line[b - 1] == '\t' || line[b - 1] == '\r')) --b;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data() + a, line.data() + b, value);
    if (a == b || ec != std::errc() || ptr != line.data() + b) return false;
    out.push_back(value);
    begin = end + 1;
  }
  return true;
}

}  // namespace

std::string FormatDouble(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) return "nan";
  return std::string(buffer, ptr);
}

std::string MatrixToCsv(const Matrix& m, const std::vector<std::string>& header) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  if (!header.empty()) out += '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += FormatDouble(m(r, c));
    }
    out += '\n';
  }
  return out;
}

Matrix ParseMatrixCsv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (!ParseRow(line, values)) {
      if (line_no == 1) continue;  // header
      throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": not numeric");
    }
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": expected " +
                                              std::to_string(rows.front().size()) + " columns");
    }
    rows.push_back(values);
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

Matrix LoadMatrixCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return ParseMatrixCsv(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

}  // namespace ggeval
