#pragma once

#include <string>
#include <vector>

namespace ergokit::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalError = 3;

// ergokit <subcommand> --config <path> --out <dir> [--seed <n>] [--quiet]
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace ergokit::cli
