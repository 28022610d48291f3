#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bbmlab/fkpp/wave.hpp"
#include "bbmlab/sim/bbm.hpp"

namespace bbm::cli {

/// Wave profile as CSV: key,value metadata, then a "z,w,logw" table in shortest round-trip text.
void save_wave(const WaveProfile& wave, const std::filesystem::path& path);
WaveProfile load_wave(const std::filesystem::path& path);

/// One row per realization. Top positions beyond the maximum are not persisted.
std::string batch_csv(const std::vector<sim::Realization>& rows);
std::vector<sim::Realization> load_batch(const std::filesystem::path& path);

/// One row of the constants table.
struct ConstantsRow {
    double alpha = 0.0;
    std::string regime;
    double psi = 0.0;
    std::optional<double> v_alpha;
    double lambda_alpha = 0.0;
    std::optional<double> c1;
    std::optional<double> c2;
    std::optional<double> phi;
    std::optional<double> phi_truncation;
};

std::string constants_csv(const std::vector<ConstantsRow>& rows);
std::string constants_json(const std::vector<ConstantsRow>& rows);
std::vector<ConstantsRow> load_constants(const std::filesystem::path& json_path);

struct ArtifactRecord {
    std::string path;
    std::string sha256;
};

/// Provenance record written next to every command's outputs. Output paths are relative to the
/// output directory; input paths are absolute.
struct RunManifest {
    std::string schema = "bbmlab-manifest/1";
    std::string tool_version;
    std::string command;
    std::map<std::string, std::string> flags;
    std::string config_text;
    std::string config_sha256;
    std::string config_dir;
    std::optional<std::uint64_t> seed;
    std::vector<ArtifactRecord> inputs;
    std::vector<ArtifactRecord> outputs;
    std::map<std::string, std::uint64_t> counts;
    double wall_clock_s = 0.0;
};

std::string manifest_json(const RunManifest& m);
RunManifest load_manifest(const std::filesystem::path& path);

inline constexpr const char* kManifestName = "manifest.json";

/// Integrity error unless `artifact` exists and, when its directory holds a manifest listing it,
/// its SHA-256 matches. With `require_manifest`, an unlisted artifact is an integrity error too.
std::string check_artifact(const std::filesystem::path& artifact, bool require_manifest);

}  // namespace bbm::cli
