#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jumpdiff::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kInputData = 3,
  kNumeric = 4,
};

inline constexpr const char* kManifestName = "run.json";

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

// Hex SHA-256 of a file's bytes.
std::string file_sha256(const std::string& path);

}  // namespace jumpdiff::cli
