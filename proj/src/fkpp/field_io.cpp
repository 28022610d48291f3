#include "bbmlab/fkpp/field_io.hpp"

#include <bit>
#include <cstring>
#include <map>
#include <sstream>

#include "bbmlab/error.hpp"
#include "bbmlab/io/files.hpp"

namespace bbm {

static_assert(std::endian::native == std::endian::little, "field payloads are little-endian");

FieldFiles save_field(const SolutionField& field, const std::filesystem::path& dir, const std::string& stem) {
    FieldFiles files{dir / (stem + ".csv"), dir / (stem + ".bin")};
    const auto raw = field.raw();
    const std::string_view bytes(reinterpret_cast<const char*>(raw.data()), raw.size() * sizeof(double));
    io::write_atomic(files.payload, bytes);

    const auto& g = field.grid();
    std::ostringstream h;
    h << "key,value\n"
      << "format,bbmlab-field\n"
      << "version," << kFieldFormatVersion << "\n"
      << "scheme," << to_string(field.scheme()) << "\n"
      << "window_policy," << to_string(g.window_policy) << "\n"
      << "z_min," << io::format_double(g.z_min) << "\n"
      << "z_max," << io::format_double(g.z_max) << "\n"
      << "dz," << io::format_double(g.dz) << "\n"
      << "dt," << io::format_double(g.dt) << "\n"
      << "t_max," << io::format_double(g.t_max) << "\n"
      << "nodes," << field.nodes() << "\n"
      << "slices," << field.slices() << "\n"
      << "payload," << files.payload.filename().string() << "\n"
      << "payload_bytes," << bytes.size() << "\n"
      << "payload_sha256," << io::sha256_hex(bytes) << "\n"
      << "slice,time,origin\n";
    for (std::size_t k = 0; k < field.slices(); ++k) {
        h << k << "," << io::format_double(field.time(k)) << "," << io::format_double(field.origin(k)) << "\n";
    }
    io::write_atomic(files.header, h.str());
    return files;
}

SolutionField load_field(const std::filesystem::path& header) {
    std::istringstream in(io::read_file(header));
    std::string line;
    std::map<std::string, std::string> meta;
    std::getline(in, line);
    if (line != "key,value") fail(ErrorKind::Integrity, header.string() + ": not a field header");
    while (std::getline(in, line) && line != "slice,time,origin") {
        const auto comma = line.find(',');
        if (comma == std::string::npos) fail(ErrorKind::Integrity, header.string() + ": malformed line '" + line + "'");
        meta[line.substr(0, comma)] = line.substr(comma + 1);
    }
    auto need = [&](const char* key) -> const std::string& {
        auto it = meta.find(key);
        if (it == meta.end()) fail(ErrorKind::Integrity, header.string() + ": missing key " + key);
        return it->second;
    };
    if (need("format") != "bbmlab-field") fail(ErrorKind::Integrity, "unknown field format");
    if (std::stoi(need("version")) != kFieldFormatVersion) fail(ErrorKind::Integrity, "unsupported field version");

    SpaceTimeGrid g;
    g.z_min = io::parse_double(need("z_min"));
    g.z_max = io::parse_double(need("z_max"));
    g.dz = io::parse_double(need("dz"));
    g.dt = io::parse_double(need("dt"));
    g.t_max = io::parse_double(need("t_max"));
    g.window_policy = need("window_policy") == "fixed" ? WindowPolicy::Fixed : WindowPolicy::MovingWithFront;
    const Scheme scheme = need("scheme") == "fd" ? Scheme::Fd : Scheme::Duhamel;
    const std::size_t nodes = std::stoull(need("nodes"));
    const std::size_t slices = std::stoull(need("slices"));

    std::vector<double> times, origins;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto a = line.find(',');
        const auto b = line.find(',', a + 1);
        if (a == std::string::npos || b == std::string::npos) fail(ErrorKind::Integrity, "malformed slice row");
        times.push_back(io::parse_double(std::string_view(line).substr(a + 1, b - a - 1)));
        origins.push_back(io::parse_double(std::string_view(line).substr(b + 1)));
    }
    if (times.size() != slices) fail(ErrorKind::Integrity, "slice table length does not match the header");

    const std::string bytes = io::read_file(header.parent_path() / need("payload"));
    if (bytes.size() != std::stoull(need("payload_bytes")) || bytes.size() != nodes * slices * sizeof(double)) {
        fail(ErrorKind::Integrity, "field payload has the wrong size");
    }
    if (io::sha256_hex(bytes) != need("payload_sha256")) fail(ErrorKind::Integrity, "field payload hash mismatch");
    std::vector<double> logu(nodes * slices);
    std::memcpy(logu.data(), bytes.data(), bytes.size());

    SolutionField field(g, scheme, nodes);
    field.assign(std::move(times), std::move(origins), std::move(logu));
    return field;
}

}  // namespace bbm
