#pragma once

#include <filesystem>
#include <string>

#include "bbmlab/fkpp/field.hpp"

namespace bbm {

/// Field snapshot as a pair of files:
///   <stem>.csv  key,value metadata (format, version, scheme, grid, counts, payload name and SHA-256)
///               followed by a "slice,time,origin" table;
///   <stem>.bin  row-major log u, one slice after another, IEEE-754 binary64 little-endian.
/// Numbers in the CSV use shortest round-trip text, so loading is bit-exact.
struct FieldFiles {
    std::filesystem::path header;
    std::filesystem::path payload;
};

inline constexpr int kFieldFormatVersion = 1;

FieldFiles save_field(const SolutionField& field, const std::filesystem::path& dir, const std::string& stem);

/// Throws Integrity on a missing payload, size or hash mismatch, or an unknown format version.
SolutionField load_field(const std::filesystem::path& header);

}  // namespace bbm
