#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace turntake {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitInternal = 2;

/// Command-line entry point; args excludes the program name. Diagnostics go to
/// `err`, results without --out to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace turntake
