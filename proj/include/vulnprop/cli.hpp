#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vulnprop {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNoConvergence = 2;

/// Entry point of the `vulnprop` tool. args excludes the program name.
/// Standard output carries CSV only; diagnostics go to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vulnprop
