#pragma once

// Command-line front end. run_cli takes the arguments without the program name
// and returns the process exit code:
//   0 success, 1 unexpected failure, 2 usage error, 3 model/config mismatch,
//   4 malformed stream or file, 5 file I/O error.

#include <ostream>
#include <string>
#include <vector>

namespace nvc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitFormat = 4;
inline constexpr int kExitIo = 5;

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nvc::cli
