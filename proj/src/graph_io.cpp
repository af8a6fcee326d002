#include "ggeval/graph_io.hpp"

#include <fstream>
#include <sstream>

#include "ggeval/error.hpp"
#include "json.hpp"

namespace ggeval {

namespace {

using nlohmann::json;

[[noreturn]] void Fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + what);
}

std::optional<Matrix> ParseMatrix(const json& node, std::size_t line, const char* key) {
  if (node.is_null()) return std::nullopt;
  if (!node.is_array()) Fail(line, std::string("'") + key + "' must be an array or null");
  const auto rows = static_cast<Eigen::Index>(node.size());
  Eigen::Index cols = rows > 0 && node[0].is_array() ? static_cast<Eigen::Index>(node[0].size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = node[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      Fail(line, std::string("'") + key + "' rows must be arrays of equal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) Fail(line, std::string("'") + key + "' entries must be numbers");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

json MatrixToJson(const std::optional<Matrix>& m) {
  if (!m) return nullptr;
  json rows = json::array();
  for (Eigen::Index r = 0; r < m->rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m->cols(); ++c) row.push_back((*m)(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Graph ParseRecord(const std::string& text, std::size_t line) {
  json record;
  try {
    record = json::parse(text);
  } catch (const json::parse_error& e) {
    Fail(line, e.what());
  }
  if (!record.is_object()) Fail(line, "record is not an object");
  if (record.contains("directed") && record["directed"].is_boolean() &&
      record["directed"].get<bool>()) {
    Fail(line, "directed graphs are not supported");
  }
  if (!record.contains("n") || !record["n"].is_number_integer()) {
    Fail(line, "missing integer field 'n'");
  }
  const auto n = record["n"].get<std::int64_t>();
  if (n < 0) Fail(line, "'n' must be non-negative");

  std::vector<Edge> edges;
  if (record.contains("edges")) {
    const json& list = record["edges"];
    if (!list.is_array()) Fail(line, "'edges' must be an array");
    edges.reserve(list.size());
    for (const json& pair : list) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
          !pair[1].is_number_integer()) {
        Fail(line, "each edge must be [u, v] with integer endpoints");
      }
      edges.push_back({pair[0].get<NodeId>(), pair[1].get<NodeId>()});
    }
  } else {
    Fail(line, "missing field 'edges'");
  }
  auto x = ParseMatrix(record.value("x", json()), line, "x");
  auto e = ParseMatrix(record.value("e", json()), line, "e");
  try {
    return Graph(static_cast<NodeId>(n), std::move(edges), std::move(x), std::move(e));
  } catch (const Error& err) {
    throw Error(ErrorCode::kInvariantViolation,
                "line " + std::to_string(line) + ": " + err.what());
  }
}

void CheckFormat(std::string_view format) {
  if (format != kFormatJsonl) {
    throw Error(ErrorCode::kInvalidArgument, "unsupported graph format '" +
                                                 std::string(format) + "'");
  }
}

}  // namespace

GraphSet ReadGraphs(std::istream& in, std::string name) {
  GraphSet set{std::move(name), {}};
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    set.graphs.push_back(ParseRecord(text, line));
  }
  return set;
}

void WriteGraphs(const GraphSet& set, std::ostream& out) {
  for (const Graph& g : set.graphs) {
    json edges = json::array();
    for (auto [u, v] : g.edges()) edges.push_back({u, v});
    json record = {{"n", g.num_nodes()},
                   {"edges", std::move(edges)},
                   {"x", MatrixToJson(g.node_features())},
                   {"e", MatrixToJson(g.edge_features())}};
    out << record.dump() << '\n';
  }
}

GraphSet LoadGraphs(const std::filesystem::path& path, std::string_view format) {
  CheckFormat(format);
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return ReadGraphs(in, path.stem().string());
}

void SaveGraphs(const GraphSet& set, const std::filesystem::path& path,
                std::string_view format) {
  CheckFormat(format);
  std::ostringstream out;
  WriteGraphs(set, out);
  WriteFileAtomic(path, out.str());
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "rename to " + path.string() + ": " + ec.message());
}

}  // namespace ggeval
