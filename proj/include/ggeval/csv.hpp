#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ggeval/graph.hpp"

namespace ggeval {

/// Shortest decimal text that parses back to exactly `value`.
std::string FormatDouble(double value);

/// One row per matrix row, comma separated, optional header line.
std::string MatrixToCsv(const Matrix& m, const std::vector<std::string>& header = {});

/// Parses a numeric CSV. A first line that does not parse as numbers is
/// treated as a header. Throws ParseError with the line number on ragged or
/// non-numeric rows.
Matrix ParseMatrixCsv(std::istream& in);
Matrix LoadMatrixCsv(const std::filesystem::path& path);

}  // namespace ggeval
