#pragma once

namespace extcam::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitConfig = 4;
inline constexpr int kExitFormat = 5;
inline constexpr int kExitShape = 6;
inline constexpr int kExitNumeric = 7;
inline constexpr int kExitArgument = 8;

/// Parses argv (argv[0] is the program name) and runs one subcommand.
int dispatch(int argc, const char* const* argv);

}  // namespace extcam::cli
