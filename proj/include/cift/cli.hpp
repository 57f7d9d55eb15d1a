#pragma once

#include <iosfwd>

namespace cift::cli {

// Exit codes shared by all subcommands.
inline constexpr int kOk = 0;
inline constexpr int kOracleFailure = 1;
inline constexpr int kUsageError = 2;
inline constexpr int kDataError = 3;

inline constexpr const char* kDefaultRatioGrid =
    "100:0,100:100,100:200,100:300,100:400,100:500";

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cift::cli
