#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace smreg::cli {

// Exit codes: 0 success, 1 unexpected failure, 2 configuration or input
// error, 3 I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace smreg::cli
