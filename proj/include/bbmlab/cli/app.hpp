#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bbm::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailure = 1;
inline constexpr int kExitIntegrity = 2;
inline constexpr int kExitPartial = 3;

inline constexpr const char* kToolVersion = "bbmlab 1.0.0";

struct Invocation {
    std::string command;
    std::optional<std::filesystem::path> config;
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> shards;
    std::optional<std::string> probes;
    std::optional<std::string> suite;
    /// replay only.
    std::optional<std::filesystem::path> manifest;
};

/// Parses argv-style arguments (without the program name), runs the command and maps errors onto
/// exit codes: configuration, integrity, dependency and numerical errors give 2, a population cap 3.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs a parsed invocation; throws bbm::Error.
int execute(const Invocation& inv, std::ostream& out);

}  // namespace bbm::cli
