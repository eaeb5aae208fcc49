#pragma once

#include <iosfwd>

namespace gsd::cli {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "GSD_OUTPUT_DIR";
inline constexpr const char* kDefaultOutputDir = "gsd-out";

/// Runs the `gsd` command line. Returns the process exit code: 0 success,
/// 1 usage or configuration error, 2 data error, 3 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gsd::cli
