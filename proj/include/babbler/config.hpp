#pragma once

// Flat key = value run configuration. Every key has a default; unknown keys
// and malformed values raise config_invalid.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace babbler {

enum class value_kind { integer, real, boolean, text, int_list, text_list };

struct config_key {
    std::string name;
    value_kind kind;
    std::string fallback;
    std::string help;
};

/// Every recognised key with its default, in documentation order.
const std::vector<config_key>& config_keys();

class run_config {
public:
    run_config();

    /// Parses `key = value` lines; '#' starts a comment; values may be double-quoted.
    static run_config from_file(const std::filesystem::path& path);
    static run_config from_text(const std::string& text, const std::string& origin = "<text>");

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    const std::string& text(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    std::uint64_t unsigned_integer(const std::string& key) const;
    double real(const std::string& key) const;
    bool boolean(const std::string& key) const;
    std::vector<std::int64_t> int_list(const std::string& key) const;
    std::vector<std::string> text_list(const std::string& key) const;

    /// Sorted key=value lines.
    std::string canonical() const;
    /// 16 hex digits of FNV-1a over canonical() (excluding `jobs`, which never
    /// changes results).
    std::string hash() const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    const config_key& lookup(const std::string& key) const;
    std::map<std::string, std::string> values_;
};

/// First line of every output file: "# config_hash=<h> synth_version=<v>".
std::string provenance_header(const run_config& cfg);
std::string provenance_header(const std::string& config_hash);

}  // namespace babbler
