#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

namespace sdsem::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kOk = 0,
    kDomainError = 1,
    kInputError = 2,
    kDivergence = 3,
};

/// Runs the command line; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Resolves a spec argument: an existing path wins, then $SDSEM_SPEC_DIR,
/// then the bundled spec directory (a bare name may omit ".json").
[[nodiscard]] std::filesystem::path resolve_spec_path(const std::string& arg);

}  // namespace sdsem::cli
