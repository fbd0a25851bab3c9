#include "fits_cli/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fits::cli {

namespace {

using namespace std::string_view_literals;

constexpr std::array kForecastCommon{
    KeySpec{"data", KeyType::Path, std::nullopt, "CSV file; relative paths also resolve against the data root"},
    KeySpec{"profile", KeyType::String, ""sv, "dataset profile (etth1, ettm2, weather, ...): period and split"},
    KeySpec{"timestamp", KeyType::Bool, "true"sv, "first CSV column is a timestamp"},
    KeySpec{"split", KeyType::String, ""sv, "etth | ettm | ratio (default: from profile, else ratio)"},
    KeySpec{"period", KeyType::Count, "0"sv, "dominant period in steps (0: from profile)"},
    KeySpec{"horizon", KeyType::Count, "96"sv, "forecast length H"},
    KeySpec{"lr", KeyType::Real, "5e-4"sv, "Adam learning rate"},
    KeySpec{"batch_size", KeyType::Count, "64"sv, "mini-batch size"},
    KeySpec{"epochs", KeyType::Count, "50"sv, "maximum epochs"},
    KeySpec{"patience", KeyType::Count, "5"sv, "early-stopping patience"},
    KeySpec{"seeds", KeyType::CountList, "2021,2022,2023,2024,2025"sv, "training seeds"},
};

template <std::size_t N>
constexpr auto with_common(const std::array<KeySpec, N>& extra) {
    std::array<KeySpec, N + kForecastCommon.size()> out{};
    std::copy(kForecastCommon.begin(), kForecastCommon.end(), out.begin());
    std::copy(extra.begin(), extra.end(), out.begin() + kForecastCommon.size());
    return out;
}

constexpr auto kTrain = with_common(std::array{
    KeySpec{"look_back", KeyType::Count, std::nullopt, "look-back window L"},
    KeySpec{"harmonic", KeyType::Harmonic, std::nullopt, "cutoff harmonic n, or none"},
    KeySpec{"supervision", KeyType::Supervision, "backcast_forecast"sv, "forecast | backcast_forecast"},
});

constexpr auto kGrid = with_common(std::array{
    KeySpec{"look_backs", KeyType::CountList, "90,180,360,720"sv, "look-back windows to try"},
    KeySpec{"harmonics", KeyType::HarmonicList, std::nullopt, "cutoff harmonics to try (none allowed)"},
    KeySpec{"supervisions", KeyType::SupervisionList, "backcast_forecast"sv, "supervision modes to try"},
    KeySpec{"threads", KeyType::Count, "1"sv, "worker threads"},
});

constexpr std::array kEval{
    KeySpec{"checkpoint", KeyType::Path, std::nullopt, "model.ckpt from a train run"},
    KeySpec{"data", KeyType::Path, std::nullopt, "CSV file"},
    KeySpec{"profile", KeyType::String, ""sv, "dataset profile"},
    KeySpec{"timestamp", KeyType::Bool, "true"sv, "first CSV column is a timestamp"},
    KeySpec{"split", KeyType::String, ""sv, "etth | ettm | ratio"},
    KeySpec{"part", KeyType::String, "test"sv, "val | test"},
};

constexpr std::array kDetect{
    KeySpec{"source", KeyType::String, "synth"sv, "synth | csv"},
    KeySpec{"values", KeyType::Path, ""sv, "CSV to score (source = csv)"},
    KeySpec{"labels", KeyType::Path, ""sv, "label file, one 0/1 per line (default: label column)"},
    KeySpec{"label_column", KeyType::String, "label"sv, "label column name when no label file is given"},
    KeySpec{"train_values", KeyType::Path, ""sv, "separate anomaly-free training CSV"},
    KeySpec{"timestamp", KeyType::Bool, "false"sv, "first CSV column is a timestamp"},
    KeySpec{"train_len", KeyType::Count, "2500"sv, "rows [0, train_len) train the model when no train_values"},
    KeySpec{"length", KeyType::Count, "4000"sv, "synthetic series length"},
    KeySpec{"channels", KeyType::Count, "1"sv, "synthetic channels"},
    KeySpec{"rate", KeyType::Real, "0.05"sv, "synthetic outlier rate"},
    KeySpec{"window", KeyType::Count, "200"sv, "reconstruction window"},
    KeySpec{"factor", KeyType::Count, "4"sv, "downsampling factor"},
    KeySpec{"checkpoint", KeyType::Path, ""sv, "trained reconstruction model"},
    KeySpec{"train_first", KeyType::Bool, "false"sv, "train a model before scoring"},
    KeySpec{"lr", KeyType::Real, "1e-2"sv, "Adam learning rate"},
    KeySpec{"batch_size", KeyType::Count, "64"sv, "mini-batch size"},
    KeySpec{"epochs", KeyType::Count, "50"sv, "maximum epochs"},
    KeySpec{"patience", KeyType::Count, "5"sv, "early-stopping patience"},
    KeySpec{"seeds", KeyType::CountList, "0"sv, "first entry seeds data generation and training"},
    KeySpec{"scores", KeyType::Bool, "true"sv, "write scores.csv"},
};

constexpr std::array kSynth{
    KeySpec{"length", KeyType::Count, "4000"sv, "series length"},
    KeySpec{"channels", KeyType::Count, "1"sv, "channels"},
    KeySpec{"rate", KeyType::Real, "0.05"sv, "minimum labeled fraction of test rows per channel"},
    KeySpec{"train_len", KeyType::Count, "2500"sv, "anomaly-free prefix"},
    KeySpec{"period", KeyType::Count, "50"sv, "sinusoid period"},
    KeySpec{"noise_std", KeyType::Real, "0.05"sv, "Gaussian noise std"},
    KeySpec{"segment_len", KeyType::Count, "30"sv, "segment outlier length"},
    KeySpec{"seeds", KeyType::CountList, "0"sv, "first entry seeds the generator"},
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = s.find(',', pos);
        out.push_back(trim(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::optional<std::size_t> parse_count(std::string_view s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::optional<double> parse_real(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<bool> parse_bool(std::string_view s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    return std::nullopt;
}

std::optional<std::size_t> parse_harmonic(std::string_view s) {
    if (s == "none") return 0;
    const auto v = parse_count(s);
    if (!v || *v == 0) return std::nullopt;
    return v;
}

bool parse_supervision(std::string_view s) { return s == "forecast" || s == "backcast_forecast"; }

template <class Parse>
bool all_of_list(std::string_view s, Parse parse) {
    const auto items = split_list(s);
    return std::all_of(items.begin(), items.end(), [&](std::string_view item) { return static_cast<bool>(parse(item)); });
}

bool type_accepts(KeyType type, std::string_view value) {
    switch (type) {
    case KeyType::String:
    case KeyType::Path: return true;
    case KeyType::Bool: return parse_bool(value).has_value();
    case KeyType::Count: return parse_count(value).has_value();
    case KeyType::Real: return parse_real(value).has_value();
    case KeyType::CountList: return all_of_list(value, parse_count);
    case KeyType::Harmonic: return parse_harmonic(value).has_value();
    case KeyType::HarmonicList: return all_of_list(value, parse_harmonic);
    case KeyType::Supervision: return parse_supervision(value);
    case KeyType::SupervisionList: return all_of_list(value, parse_supervision);
    }
    return false;
}

std::string_view type_name(KeyType type) {
    switch (type) {
    case KeyType::String: return "string";
    case KeyType::Path: return "path";
    case KeyType::Bool: return "bool (true/false)";
    case KeyType::Count: return "non-negative integer";
    case KeyType::Real: return "finite real";
    case KeyType::CountList: return "comma-separated non-negative integers";
    case KeyType::Harmonic: return "positive integer or none";
    case KeyType::HarmonicList: return "comma-separated positive integers or none";
    case KeyType::Supervision: return "forecast | backcast_forecast";
    case KeyType::SupervisionList: return "comma-separated forecast | backcast_forecast";
    }
    return "?";
}

} // namespace

std::span<const KeySpec> schema_for(std::string_view command) {
    if (command == "train") return kTrain;
    if (command == "grid") return kGrid;
    if (command == "eval") return kEval;
    if (command == "detect") return kDetect;
    if (command == "synth") return kSynth;
    throw ConfigError("unknown command '" + std::string(command) + "'");
}

Config Config::parse(std::string_view text, std::string_view origin) {
    Config cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": empty key");
        cfg.entries_[std::string(key)] = std::string(trim(line.substr(eq + 1)));
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

void Config::set_assignment(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || trim(assignment.substr(0, eq)).empty())
        throw ConfigError("--set expects key=value, got '" + std::string(assignment) + "'");
    set(std::string(trim(assignment.substr(0, eq))), std::string(trim(assignment.substr(eq + 1))));
}

void Config::resolve(std::span<const KeySpec> schema) {
    for (const auto& [key, value] : entries_) {
        const auto it = std::find_if(schema.begin(), schema.end(), [&](const KeySpec& k) { return k.name == key; });
        if (it == schema.end()) {
            std::string known;
            for (const auto& k : schema) known += (known.empty() ? "" : ", ") + std::string(k.name);
            throw ConfigError("unknown key '" + key + "' (allowed: " + known + ")");
        }
    }
    for (const auto& k : schema) {
        const std::string name(k.name);
        if (!entries_.contains(name)) {
            if (!k.default_value) throw ConfigError("missing required key '" + name + "' (" + std::string(k.help) + ")");
            entries_[name] = std::string(*k.default_value);
        }
        const auto& value = entries_[name];
        const bool empty_optional = value.empty() && k.default_value && k.default_value->empty();
        if (!empty_optional && !type_accepts(k.type, value))
            throw ConfigError("key '" + name + "': expected " + std::string(type_name(k.type)) + ", got '" + value + "'");
    }
}

const std::string& Config::raw(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing key '" + key + "'");
    return it->second;
}

bool Config::get_bool(const std::string& key) const {
    const auto v = parse_bool(raw(key));
    if (!v) throw ConfigError("key '" + key + "' is not a bool");
    return *v;
}

std::size_t Config::get_count(const std::string& key) const {
    const auto v = parse_count(raw(key));
    if (!v) throw ConfigError("key '" + key + "' is not a non-negative integer");
    return *v;
}

double Config::get_real(const std::string& key) const {
    const auto v = parse_real(raw(key));
    if (!v) throw ConfigError("key '" + key + "' is not a real number");
    return *v;
}

std::vector<std::size_t> Config::get_counts(const std::string& key) const {
    std::vector<std::size_t> out;
    for (auto item : split_list(raw(key))) {
        const auto v = parse_count(item);
        if (!v) throw ConfigError("key '" + key + "': bad list entry '" + std::string(item) + "'");
        out.push_back(*v);
    }
    return out;
}

std::vector<std::string> Config::get_strings(const std::string& key) const {
    std::vector<std::string> out;
    for (auto item : split_list(raw(key))) out.emplace_back(item);
    return out;
}

std::size_t Config::get_harmonic(const std::string& key) const {
    const auto v = parse_harmonic(raw(key));
    if (!v) throw ConfigError("key '" + key + "' is not a positive integer or none");
    return *v;
}

std::vector<std::size_t> Config::get_harmonics(const std::string& key) const {
    std::vector<std::size_t> out;
    for (auto item : split_list(raw(key))) {
        const auto v = parse_harmonic(item);
        if (!v) throw ConfigError("key '" + key + "': bad list entry '" + std::string(item) + "'");
        out.push_back(*v);
    }
    return out;
}

std::string Config::to_text() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    return out;
}

std::string harmonic_text(std::size_t harmonic) { return harmonic == 0 ? "none" : std::to_string(harmonic); }

} // namespace fits::cli
