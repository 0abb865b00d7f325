#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

namespace owns::cli {

/// Resolved invocation: flag > environment > config-file precedence has
/// already been applied by the front end for seed/threads.
struct CliOptions {
    std::filesystem::path config;
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed;   // overrides config when set
    int threads = 1;
    bool timings = false;                // measured wall_ms in CSV bodies
};

// Each command loads the config, runs, writes its artifacts under out_dir
// plus a metadata.json sidecar, and returns 0. Errors are thrown; the front
// end renders them as machine-readable JSON with a nonzero exit code.
int cmd_spectrum(const CliOptions& opts);
int cmd_select(const CliOptions& opts);
int cmd_study(const CliOptions& opts);
int cmd_march(const CliOptions& opts);

}  // namespace owns::cli
