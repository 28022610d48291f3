#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace bbm::cli {

inline constexpr const char* kConfigSchema = "bbmlab-config/1";

/// Plain-text run configuration.
///
///   file    := line*
///   line    := blank | comment | section | entry
///   comment := ('#' | ';') text
///   section := '[' name ']'
///   entry   := key '=' value
///
/// Keys before the first section belong to the unnamed section, which must hold
/// `schema = bbmlab-config/1`. Keys are unique within a section. Values are trimmed; lists are
/// comma-separated. Every error names the file, line and key.
class Config {
public:
    static Config parse(const std::string& text, const std::string& source = "<config>");
    static Config load(const std::filesystem::path& path);

    const std::string& source() const { return source_; }
    /// Directory that relative paths in the file are resolved against.
    const std::filesystem::path& base_dir() const { return base_dir_; }
    void set_base_dir(std::filesystem::path dir) { base_dir_ = std::move(dir); }

    bool has_section(const std::string& section) const;
    bool has(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key) const;
    std::optional<std::string> find_string(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    std::uint64_t get_uint(const std::string& section, const std::string& key) const;
    std::uint64_t get_uint(const std::string& section, const std::string& key, std::uint64_t fallback) const;
    std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
    std::filesystem::path get_path(const std::string& section, const std::string& key) const;
    std::optional<std::filesystem::path> find_path(const std::string& section, const std::string& key) const;
    /// The value must be one of `choices`.
    std::string get_choice(const std::string& section, const std::string& key, const std::set<std::string>& choices,
                           const std::optional<std::string>& fallback = std::nullopt) const;

    /// Configuration error for unknown keys in `section`.
    void expect_keys(const std::string& section, const std::set<std::string>& allowed) const;

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::string source_;
    std::filesystem::path base_dir_;
    std::map<std::string, std::map<std::string, Entry>> sections_;
    std::map<std::string, int> section_lines_;

    const Entry& entry(const std::string& section, const std::string& key) const;
    [[noreturn]] void error_at(const std::string& section, const std::string& key, const std::string& what) const;
};

}  // namespace bbm::cli
