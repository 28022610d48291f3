#include "bbmlab/cli/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdint>
#include <sstream>

#include <fmt/format.h>

#include "bbmlab/error.hpp"
#include "bbmlab/io/files.hpp"

namespace bbm::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
    return true;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& source) {
    Config c;
    c.source_ = source;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s[0] == '[') {
            if (s.back() != ']') fail(ErrorKind::Configuration, fmt::format("{}:{}: unterminated section header", source, line));
            section = trim(s.substr(1, s.size() - 2));
            if (!valid_name(section)) fail(ErrorKind::Configuration, fmt::format("{}:{}: bad section name '{}'", source, line, section));
            if (c.section_lines_.count(section))
                fail(ErrorKind::Configuration, fmt::format("{}:{}: section [{}] repeated (first at line {})", source, line, section,
                                                           c.section_lines_[section]));
            c.section_lines_[section] = line;
            c.sections_[section];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(ErrorKind::Configuration, fmt::format("{}:{}: expected 'key = value'", source, line));
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (!valid_name(key)) fail(ErrorKind::Configuration, fmt::format("{}:{}: bad key '{}'", source, line, key));
        auto& sec = c.sections_[section];
        if (auto it = sec.find(key); it != sec.end())
            fail(ErrorKind::Configuration,
                 fmt::format("{}:{}: key '{}' repeated (first at line {})", source, line, key, it->second.line));
        sec[key] = Entry{value, line};
    }
    const auto top = c.sections_.find("");
    if (top == c.sections_.end() || !top->second.count("schema"))
        fail(ErrorKind::Configuration, fmt::format("{}: missing 'schema = {}' before the first section", source, kConfigSchema));
    if (top->second.at("schema").value != kConfigSchema)
        fail(ErrorKind::Configuration, fmt::format("{}:{}: schema '{}' is not supported (expected {})", source,
                                                   top->second.at("schema").line, top->second.at("schema").value, kConfigSchema));
    return c;
}

Config Config::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) fail(ErrorKind::Configuration, fmt::format("config file '{}' not found", path.string()));
    Config c = parse(io::read_file(path), path.string());
    c.base_dir_ = std::filesystem::absolute(path).parent_path();
    return c;
}

bool Config::has_section(const std::string& section) const { return sections_.count(section) > 0; }

bool Config::has(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
}

void Config::error_at(const std::string& section, const std::string& key, const std::string& what) const {
    const auto& e = entry(section, key);
    fail(ErrorKind::Configuration, fmt::format("{}:{}: [{}] {}: {}", source_, e.line, section, key, what));
}

const Config::Entry& Config::entry(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    if (it == sections_.end()) fail(ErrorKind::Configuration, fmt::format("{}: missing section [{}]", source_, section));
    const auto jt = it->second.find(key);
    if (jt == it->second.end())
        fail(ErrorKind::Configuration,
             fmt::format("{}:{}: [{}] is missing key '{}'", source_, section_lines_.count(section) ? section_lines_.at(section) : 0,
                         section, key));
    return jt->second;
}

std::string Config::get_string(const std::string& section, const std::string& key) const { return entry(section, key).value; }

std::optional<std::string> Config::find_string(const std::string& section, const std::string& key) const {
    if (!has(section, key)) return std::nullopt;
    return entry(section, key).value;
}

double Config::get_double(const std::string& section, const std::string& key) const {
    const std::string& v = entry(section, key).value;
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) error_at(section, key, fmt::format("'{}' is not a number", v));
    return out;
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

std::uint64_t Config::get_uint(const std::string& section, const std::string& key) const {
    const std::string& v = entry(section, key).value;
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        error_at(section, key, fmt::format("'{}' is not a non-negative integer", v));
    return out;
}

std::uint64_t Config::get_uint(const std::string& section, const std::string& key, std::uint64_t fallback) const {
    return has(section, key) ? get_uint(section, key) : fallback;
}

std::vector<double> Config::get_doubles(const std::string& section, const std::string& key) const {
    const std::string& v = entry(section, key).value;
    std::vector<double> out;
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        double x = 0.0;
        const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
        if (item.empty() || ec != std::errc() || p != item.data() + item.size())
            error_at(section, key, fmt::format("list item '{}' is not a number", item));
        out.push_back(x);
    }
    if (out.empty()) error_at(section, key, "empty list");
    return out;
}

std::filesystem::path Config::get_path(const std::string& section, const std::string& key) const {
    std::filesystem::path p(entry(section, key).value);
    if (p.empty()) error_at(section, key, "empty path");
    return p.is_absolute() ? p : base_dir_ / p;
}

std::optional<std::filesystem::path> Config::find_path(const std::string& section, const std::string& key) const {
    if (!has(section, key)) return std::nullopt;
    return get_path(section, key);
}

std::string Config::get_choice(const std::string& section, const std::string& key, const std::set<std::string>& choices,
                               const std::optional<std::string>& fallback) const {
    if (!has(section, key) && fallback) return *fallback;
    const std::string v = get_string(section, key);
    if (!choices.count(v)) {
        std::string list;
        for (const auto& c : choices) list += (list.empty() ? "" : "|") + c;
        error_at(section, key, fmt::format("'{}' is not one of {}", v, list));
    }
    return v;
}

void Config::expect_keys(const std::string& section, const std::set<std::string>& allowed) const {
    const auto it = sections_.find(section);
    if (it == sections_.end()) return;
    for (const auto& [key, e] : it->second)
        if (!allowed.count(key)) error_at(section, key, "unknown key");
}

}  // namespace bbm::cli
