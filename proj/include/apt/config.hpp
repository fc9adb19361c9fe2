#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace apt {

struct ConfigKey {
    std::string_view name;
    std::string_view default_value;
    std::string_view help;
};

/// Every recognized key with its default. Keys under "factor." are open-ended.
std::span<const ConfigKey> documented_keys();

inline constexpr std::string_view kFactorPrefix = "factor.";
inline constexpr std::string_view kEnvPrefix = "APTROLL_";

/// Environment variable that overrides `key`: APTROLL_ + upper-case key with '.' replaced by '_'.
std::string env_name(std::string_view key);

/**
 * @brief Flat key = value run configuration.
 *
 * Layering, lowest to highest precedence: documented defaults, config file,
 * environment variables, explicit set() calls (CLI flags). Lines starting
 * with '#' are comments. Unknown keys are rejected.
 */
class Config {
public:
    Config() = default;

    static Config from_file(const std::filesystem::path& path);
    static Config from_string(std::string_view text, std::string_view origin = "<string>");

    /// Applies APTROLL_* overrides for documented keys.
    void apply_environment();

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    int get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<std::string> get_list(const std::string& key) const;
    std::vector<int> get_int_list(const std::string& key) const;

    /// factor.<ID> entries, keyed by ID.
    std::map<std::string, std::string> factor_entries() const;

    /// Directory relative paths in the file resolve against.
    const std::filesystem::path& base_dir() const { return base_dir_; }
    std::filesystem::path resolve_path(const std::string& key) const;

private:
    std::map<std::string, std::string> values_;
    std::filesystem::path base_dir_ = ".";
};

}  // namespace apt
