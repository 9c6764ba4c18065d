#pragma once

// Placeholder; filled in with the subcommand implementations.

namespace octoroll::cli {
inline int run(int, char**) { return 2; }
}  // namespace octoroll::cli
