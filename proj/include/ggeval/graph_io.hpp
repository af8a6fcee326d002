#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "ggeval/graph.hpp"

namespace ggeval {

// JSON-lines container, one graph per line:
//   {"n": 4, "edges": [[0,1],[1,2]], "x": [[1.0],[0.5],...] | null, "e": [[...]] | null}
// A record carrying "directed": true is rejected. Blank lines are skipped.
inline constexpr std::string_view kFormatJsonl = "jsonl";

GraphSet ReadGraphs(std::istream& in, std::string name = "graphs");
void WriteGraphs(const GraphSet& set, std::ostream& out);

GraphSet LoadGraphs(const std::filesystem::path& path,
                    std::string_view format = kFormatJsonl);
void SaveGraphs(const GraphSet& set, const std::filesystem::path& path,
                std::string_view format = kFormatJsonl);

/// Writes `contents` to a sibling temp file then renames it over `path`.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace ggeval
