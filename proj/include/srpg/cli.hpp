#pragma once

#include <iosfwd>

namespace srpg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `srpg` tool. Subcommands: gen, inject, ingest, guard,
// eval, serve.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace srpg::cli
