#pragma once

#include <iosfwd>
#include <string>

#include "addrnet/platform.hpp"

namespace addrnet {

/// A builtin name (`xeon_phi`, `pcie_scale:16`, ...) or a platform file.
PlatformSpec load_platform_arg(const std::string& arg);

/// Exit status: 0 success, 1 domain error or Incorrect trace, 2 usage.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace addrnet
