#include "apt/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "apt/common.hpp"

namespace apt {

namespace {

constexpr ConfigKey kKeys[] = {
    {"assets.path", "", "CSV of asset series (levels or returns)"},
    {"assets.date_column", "date", "date column of the asset file"},
    {"assets.columns", "", "comma list of asset columns; empty selects all"},
    {"assets.kind", "levels", "levels | returns | excess"},
    {"series.path", "", "CSV of raw market series used by factor recipes"},
    {"series.date_column", "date", "date column of the series file"},
    {"factors.path", "", "optional CSV of ready-made factor series"},
    {"factors.date_column", "date", "date column of the factor file"},
    {"factors.columns", "", "comma list of columns taken from factors.path; empty selects all"},
    {"factors", "", "comma list fixing the factor order; empty sorts factor.* ids, then factors.path columns"},
    {"risk_free.column", "", "annualized risk-free rate column in the series file; empty disables"},
    {"risk_free.divisor", "245", "periods per year used to de-annualize rates"},
    {"risk_free.scale", "1", "multiplier applied to quoted rates (0.01 for percent)"},
    {"delimiter", ",", "CSV delimiter"},
    {"return_kind", "log", "log | simple"},
    {"join_mode", "intersection", "intersection | union_with_forward_fill"},
    {"max_fill_gap", "0", "calendar days a value may be carried forward"},
    {"panel", "", "manifest.json of a cached panel; when set, inputs are not re-read"},
    {"window", "500", "rolling window width(s), comma list allowed"},
    {"step", "1", "rolling window step"},
    {"threads", "1", "worker threads"},
    {"test_level", "0.05", "significance level for reject decisions"},
    {"shanken", "false", "apply the errors-in-variables correction to premium standard errors"},
    {"cs_intercept", "false", "diagnostic cross-sectional intercept"},
    {"json", "false", "also write long-format JSON for rolling output"},
    {"out", "out", "output directory"},
    {"seed", "20240101", "random seed for simulate"},
    {"adf.max_lag", "auto", "largest ADF lag; auto uses floor(12 (T/100)^0.25)"},
    {"adf.deterministic", "constant", "none | constant | constant_trend"},
    {"sim.n", "33", "simulated assets"},
    {"sim.m", "9", "simulated factors"},
    {"sim.T", "6300", "simulated observations"},
    {"sim.reps", "500", "Monte Carlo replications"},
    {"sim.alpha", "0", "common true alpha per asset (per-period units)"},
    {"sim.innovations", "gaussian", "gaussian | student_t"},
    {"sim.t_df", "5", "Student-t degrees of freedom"},
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

const ConfigKey* find_key(std::string_view name) {
    for (const auto& k : kKeys) {
        if (k.name == name) {
            return &k;
        }
    }
    return nullptr;
}

bool is_factor_key(std::string_view name) {
    return name.size() > kFactorPrefix.size() && name.substr(0, kFactorPrefix.size()) == kFactorPrefix;
}

}  // namespace

std::span<const ConfigKey> documented_keys() {
    return kKeys;
}

std::string env_name(std::string_view key) {
    std::string out(kEnvPrefix);
    for (char c : key) {
        out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

Config Config::from_string(std::string_view text, std::string_view origin) {
    Config cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (view.empty() || view.front() == '#') {
            continue;
        }
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw DataError(std::string(origin) + ":" + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key(trim(view.substr(0, eq)));
        try {
            cfg.set(key, std::string(trim(view.substr(eq + 1))));
        } catch (const DataError& e) {
            throw DataError(std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

Config Config::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open config file " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    Config cfg = from_string(buffer.str(), path.string());
    cfg.base_dir_ = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
    return cfg;
}

void Config::apply_environment() {
    for (const auto& k : kKeys) {
        if (const char* v = std::getenv(env_name(k.name).c_str())) {
            values_[std::string(k.name)] = v;
        }
    }
}

void Config::set(const std::string& key, const std::string& value) {
    if (!find_key(key) && !is_factor_key(key)) {
        throw DataError("unknown config key '" + key + "'");
    }
    values_[key] = value;
}

bool Config::has(const std::string& key) const {
    auto it = values_.find(key);
    return it != values_.end() && !it->second.empty();
}

std::string Config::get_string(const std::string& key) const {
    if (auto it = values_.find(key); it != values_.end()) {
        return it->second;
    }
    if (const auto* k = find_key(key)) {
        return std::string(k->default_value);
    }
    throw std::invalid_argument("unknown config key '" + key + "'");
}

int Config::get_int(const std::string& key) const {
    const std::string v = get_string(key);
    try {
        std::size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (used != v.size()) {
            throw std::invalid_argument(v);
        }
        return static_cast<int>(x);
    } catch (const std::exception&) {
        throw DataError("config key '" + key + "': '" + v + "' is not an integer");
    }
}

double Config::get_double(const std::string& key) const {
    const std::string v = get_string(key);
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) {
            throw std::invalid_argument(v);
        }
        return x;
    } catch (const std::exception&) {
        throw DataError("config key '" + key + "': '" + v + "' is not a number");
    }
}

bool Config::get_bool(const std::string& key) const {
    std::string v = get_string(key);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "1" || v == "true" || v == "yes" || v == "on") {
        return true;
    }
    if (v.empty() || v == "0" || v == "false" || v == "no" || v == "off") {
        return false;
    }
    throw DataError("config key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<std::string> Config::get_list(const std::string& key) const {
    std::vector<std::string> out;
    const std::string v = get_string(key);
    std::string_view rest(v);
    if (trim(rest).empty()) {
        return out;
    }
    while (true) {
        const auto pos = rest.find(',');
        out.emplace_back(trim(rest.substr(0, pos)));
        if (pos == std::string_view::npos) {
            break;
        }
        rest.remove_prefix(pos + 1);
    }
    return out;
}

std::vector<int> Config::get_int_list(const std::string& key) const {
    std::vector<int> out;
    for (const auto& item : get_list(key)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw DataError("config key '" + key + "': '" + item + "' is not an integer");
        }
    }
    return out;
}

std::map<std::string, std::string> Config::factor_entries() const {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : values_) {
        if (is_factor_key(k)) {
            out[k.substr(kFactorPrefix.size())] = v;
        }
    }
    return out;
}

std::filesystem::path Config::resolve_path(const std::string& key) const {
    std::filesystem::path p(get_string(key));
    if (p.empty() || p.is_absolute()) {
        return p;
    }
    return base_dir_ / p;
}

}  // namespace apt
