#pragma once

#include <iosfwd>

namespace verix::cli {

// Exit codes: 0 result produced, 2 usage or input error, 3 internal contract breach.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitContract = 3;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace verix::cli
