#pragma once

#include "fits/error.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fits::cli {

class ConfigError : public Error {
public:
    using Error::Error;
};

enum class KeyType : std::uint8_t {
    String,
    Path,
    Bool,
    Count,          ///< non-negative integer
    Real,
    CountList,      ///< comma-separated non-negative integers
    Harmonic,       ///< positive integer or `none`
    HarmonicList,
    Supervision,    ///< `forecast` or `backcast_forecast`
    SupervisionList,
};

struct KeySpec {
    std::string_view name;
    KeyType type;
    std::optional<std::string_view> default_value; ///< nullopt = required
    std::string_view help;
};

/// Schema for a command name (train, grid, eval, detect, synth).
std::span<const KeySpec> schema_for(std::string_view command);

/// Flat key/value settings. Later assignments override earlier ones.
class Config {
public:
    /// Parses `key = value` lines; `#` starts a comment, blank lines are ignored.
    static Config parse(std::string_view text, std::string_view origin = "<config>");
    static Config load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value) { entries_[key] = value; }
    /// Accepts `key=value`.
    void set_assignment(std::string_view assignment);

    /// Rejects unknown keys, fills defaults, reports missing required keys, and checks
    /// that every value parses as its declared type.
    void resolve(std::span<const KeySpec> schema);

    bool has(const std::string& key) const { return entries_.contains(key); }
    const std::string& raw(const std::string& key) const;

    std::string get_string(const std::string& key) const { return raw(key); }
    bool get_bool(const std::string& key) const;
    std::size_t get_count(const std::string& key) const;
    double get_real(const std::string& key) const;
    std::vector<std::size_t> get_counts(const std::string& key) const;
    std::vector<std::string> get_strings(const std::string& key) const;
    std::size_t get_harmonic(const std::string& key) const; ///< 0 = no filter
    std::vector<std::size_t> get_harmonics(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

    /// Canonical text form, one `key = value` per line in key order.
    std::string to_text() const;

private:
    std::map<std::string, std::string> entries_;
};

std::string harmonic_text(std::size_t harmonic);

} // namespace fits::cli
