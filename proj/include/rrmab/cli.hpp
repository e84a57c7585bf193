#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rrmab::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_runtime = 2;

/// Parses argv, dispatches the subcommand and returns the process exit code:
/// 0 on success, 1 for usage errors (bad flags, bad values, unknown names),
/// 2 when the run itself fails. Diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// "4096,8192, 16384" -> {4096, 8192, 16384}. Throws std::invalid_argument.
std::vector<std::int64_t> parse_int_list(const std::string& text);

/// Seed precedence: explicit flag, then config file, then RRMAB_SEED, then 0.
/// Throws std::invalid_argument when RRMAB_SEED is not an unsigned integer.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::optional<std::uint64_t> config);

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// "runs/r.csv" + "_agg" -> "runs/r_agg.csv".
std::filesystem::path with_suffix(const std::filesystem::path& path, const std::string& suffix);

}  // namespace rrmab::cli
