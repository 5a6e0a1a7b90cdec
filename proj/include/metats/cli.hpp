#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace metats {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitRuntime = 2,
    kExitSelftest = 3,
    kExitMissingFile = 4,
    kExitMalformed = 5,
};

/// Directory searched by --preset: $METATS_PRESET_DIR, else the in-tree
/// presets directory recorded at build time.
std::filesystem::path preset_directory();

/// Entry point of the `metats` tool. `args` excludes the program name.
/// Machine-readable output goes to `out`, progress and diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace metats
