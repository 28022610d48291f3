#include "bbmlab/cli/artifacts.hpp"

#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "bbmlab/error.hpp"
#include "bbmlab/io/files.hpp"

namespace bbm::cli {

namespace {

using io::format_double;
using io::parse_double;
using ordered = nlohmann::ordered_json;

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(line);
    while (std::getline(in, item, sep)) out.push_back(item);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

ordered number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

ordered optional_number(const std::optional<double>& v) { return v ? number(*v) : ordered(nullptr); }

std::optional<double> read_optional(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    if (j.at(key).is_string()) return parse_double(j.at(key).get<std::string>());
    return j.at(key).get<double>();
}

std::string opt_text(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

void save_wave(const WaveProfile& wave, const std::filesystem::path& path) {
    std::ostringstream o;
    o << "key,value\n"
      << "format,bbmlab-wave\n"
      << "version,1\n"
      << "t_source," << format_double(wave.t_source) << "\n"
      << "left_slope," << format_double(wave.left_slope) << "\n"
      << "left_fit_lo," << format_double(wave.left_fit_lo) << "\n"
      << "left_fit_hi," << format_double(wave.left_fit_hi) << "\n"
      << "bramson_offset," << (wave.bramson_offset ? format_double(*wave.bramson_offset) : "none") << "\n"
      << "points," << wave.z.size() << "\n"
      << "z,w,logw\n";
    for (std::size_t i = 0; i < wave.z.size(); ++i)
        o << format_double(wave.z[i]) << "," << format_double(wave.w[i]) << "," << format_double(wave.logw[i]) << "\n";
    io::write_atomic(path, o.str());
}

WaveProfile load_wave(const std::filesystem::path& path) {
    std::istringstream in(io::read_file(path));
    std::string line;
    std::map<std::string, std::string> meta;
    std::getline(in, line);
    if (line != "key,value") fail(ErrorKind::Integrity, path.string() + ": not a wave artifact");
    while (std::getline(in, line) && line != "z,w,logw") {
        const auto f = split(line);
        if (f.size() != 2) fail(ErrorKind::Integrity, path.string() + ": malformed line '" + line + "'");
        meta[f[0]] = f[1];
    }
    if (meta["format"] != "bbmlab-wave" || meta["version"] != "1") fail(ErrorKind::Integrity, path.string() + ": unknown wave format");
    WaveProfile w;
    w.t_source = parse_double(meta["t_source"]);
    w.left_slope = parse_double(meta["left_slope"]);
    w.left_fit_lo = parse_double(meta["left_fit_lo"]);
    w.left_fit_hi = parse_double(meta["left_fit_hi"]);
    if (meta["bramson_offset"] != "none") w.bramson_offset = parse_double(meta["bramson_offset"]);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 3) fail(ErrorKind::Integrity, path.string() + ": malformed row '" + line + "'");
        w.z.push_back(parse_double(f[0]));
        w.w.push_back(parse_double(f[1]));
        w.logw.push_back(parse_double(f[2]));
    }
    if (std::to_string(w.z.size()) != meta["points"]) fail(ErrorKind::Integrity, path.string() + ": truncated wave table");
    return w;
}

std::string batch_csv(const std::vector<sim::Realization>& rows) {
    std::ostringstream o;
    o << "replica,stream,tau,x_at_tau,m_t,n_t,branched,root_lifetime,line_position\n";
    for (const auto& r : rows) {
        o << r.replica << "," << r.stream << "," << format_double(r.tau) << "," << format_double(r.x_at_tau) << ","
          << format_double(r.m_t) << "," << r.n_t << "," << (r.branched ? 1 : 0) << "," << format_double(r.root_lifetime) << ","
          << format_double(r.line_position) << "\n";
    }
    return o.str();
}

std::vector<sim::Realization> load_batch(const std::filesystem::path& path) {
    std::istringstream in(io::read_file(path));
    std::string line;
    std::getline(in, line);
    if (line != "replica,stream,tau,x_at_tau,m_t,n_t,branched,root_lifetime,line_position")
        fail(ErrorKind::Integrity, path.string() + ": not a batch artifact");
    std::vector<sim::Realization> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 9) fail(ErrorKind::Integrity, path.string() + ": malformed row '" + line + "'");
        sim::Realization r;
        r.replica = std::stoull(f[0]);
        r.stream = std::stoull(f[1]);
        r.tau = parse_double(f[2]);
        r.x_at_tau = parse_double(f[3]);
        r.m_t = parse_double(f[4]);
        r.n_t = std::stoull(f[5]);
        r.branched = f[6] == "1";
        r.root_lifetime = parse_double(f[7]);
        r.line_position = parse_double(f[8]);
        r.top_positions = {r.m_t};
        out.push_back(std::move(r));
    }
    return out;
}

std::string constants_csv(const std::vector<ConstantsRow>& rows) {
    std::ostringstream o;
    o << "alpha,regime,psi,v_alpha,lambda_alpha,c1,c2,phi,phi_truncation\n";
    for (const auto& r : rows) {
        o << format_double(r.alpha) << "," << r.regime << "," << format_double(r.psi) << "," << opt_text(r.v_alpha) << ","
          << format_double(r.lambda_alpha) << "," << opt_text(r.c1) << "," << opt_text(r.c2) << "," << opt_text(r.phi) << ","
          << opt_text(r.phi_truncation) << "\n";
    }
    return o.str();
}

std::string constants_json(const std::vector<ConstantsRow>& rows) {
    ordered doc;
    doc["format"] = "bbmlab-constants/1";
    auto& list = doc["rows"] = ordered::array();
    for (const auto& r : rows) {
        ordered j;
        j["alpha"] = number(r.alpha);
        j["regime"] = r.regime;
        j["psi"] = number(r.psi);
        j["v_alpha"] = optional_number(r.v_alpha);
        j["lambda_alpha"] = number(r.lambda_alpha);
        j["c1"] = optional_number(r.c1);
        j["c2"] = optional_number(r.c2);
        j["phi"] = optional_number(r.phi);
        j["phi_truncation"] = optional_number(r.phi_truncation);
        list.push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

std::vector<ConstantsRow> load_constants(const std::filesystem::path& json_path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(io::read_file(json_path));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Integrity, fmt::format("{}: {}", json_path.string(), e.what()));
    }
    if (doc.value("format", "") != "bbmlab-constants/1") fail(ErrorKind::Integrity, json_path.string() + ": not a constants artifact");
    std::vector<ConstantsRow> out;
    for (const auto& j : doc.at("rows")) {
        ConstantsRow r;
        r.alpha = *read_optional(j, "alpha");
        r.regime = j.at("regime").get<std::string>();
        r.psi = *read_optional(j, "psi");
        r.v_alpha = read_optional(j, "v_alpha");
        r.lambda_alpha = *read_optional(j, "lambda_alpha");
        r.c1 = read_optional(j, "c1");
        r.c2 = read_optional(j, "c2");
        r.phi = read_optional(j, "phi");
        r.phi_truncation = read_optional(j, "phi_truncation");
        out.push_back(r);
    }
    return out;
}

std::string manifest_json(const RunManifest& m) {
    ordered doc;
    doc["schema"] = m.schema;
    doc["tool_version"] = m.tool_version;
    doc["command"] = m.command;
    doc["flags"] = m.flags;
    doc["config"] = {{"sha256", m.config_sha256}, {"dir", m.config_dir}, {"text", m.config_text}};
    doc["seed"] = m.seed ? ordered(*m.seed) : ordered(nullptr);
    auto records = [](const std::vector<ArtifactRecord>& v) {
        ordered a = ordered::array();
        for (const auto& r : v) a.push_back({{"path", r.path}, {"sha256", r.sha256}});
        return a;
    };
    doc["inputs"] = records(m.inputs);
    doc["outputs"] = records(m.outputs);
    doc["counts"] = m.counts;
    doc["wall_clock_s"] = m.wall_clock_s;
    return doc.dump(2) + "\n";
}

RunManifest load_manifest(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(io::read_file(path));
        RunManifest m;
        m.schema = doc.at("schema").get<std::string>();
        if (m.schema != "bbmlab-manifest/1") fail(ErrorKind::Integrity, path.string() + ": unknown manifest schema");
        m.tool_version = doc.at("tool_version").get<std::string>();
        m.command = doc.at("command").get<std::string>();
        m.flags = doc.at("flags").get<std::map<std::string, std::string>>();
        m.config_sha256 = doc.at("config").at("sha256").get<std::string>();
        m.config_dir = doc.at("config").at("dir").get<std::string>();
        m.config_text = doc.at("config").at("text").get<std::string>();
        if (!doc.at("seed").is_null()) m.seed = doc.at("seed").get<std::uint64_t>();
        for (const auto& r : doc.at("inputs")) m.inputs.push_back({r.at("path"), r.at("sha256")});
        for (const auto& r : doc.at("outputs")) m.outputs.push_back({r.at("path"), r.at("sha256")});
        m.counts = doc.at("counts").get<std::map<std::string, std::uint64_t>>();
        m.wall_clock_s = doc.at("wall_clock_s").get<double>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Integrity, fmt::format("{}: malformed manifest: {}", path.string(), e.what()));
    }
}

std::string check_artifact(const std::filesystem::path& artifact, bool require_manifest) {
    if (!std::filesystem::is_regular_file(artifact)) fail(ErrorKind::Integrity, fmt::format("artifact '{}' not found", artifact.string()));
    const std::string hash = io::sha256_file(artifact);
    const auto manifest = artifact.parent_path() / kManifestName;
    if (!std::filesystem::exists(manifest)) {
        if (require_manifest) fail(ErrorKind::Integrity, fmt::format("no manifest next to '{}'", artifact.string()));
        return hash;
    }
    const RunManifest m = load_manifest(manifest);
    const std::string name = artifact.filename().string();
    for (const auto& r : m.outputs) {
        if (r.path != name) continue;
        if (r.sha256 != hash)
            fail(ErrorKind::Integrity, fmt::format("'{}' does not match its manifest (sha256 {} vs {})", artifact.string(), hash, r.sha256));
        return hash;
    }
    if (require_manifest) fail(ErrorKind::Integrity, fmt::format("'{}' is not listed in {}", artifact.string(), manifest.string()));
    return hash;
}

}  // namespace bbm::cli
