#pragma once

// Command-line front end. Subcommands write one data file (CSV or JSON) plus
// a `<out>.manifest.json` recording the exact arguments, the build version
// and an FNV-1a hash of the data, which `--replay <manifest>` re-checks.
//
// Exit codes: 0 success, 1 runtime failure (or witness invariant violation),
// 2 usage error.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace lsv::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

std::string_view version() noexcept;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lsv::cli
