#pragma once

#include <iosfwd>

namespace ggeval {

inline constexpr const char* kVersion = "0.1.0";

/// Command-line entry point. Returns the process exit code: 0 on success, 2
/// for usage errors, 1 for failed checks and invariant violations.
int Dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int Dispatch(int argc, const char* const* argv);

}  // namespace ggeval
