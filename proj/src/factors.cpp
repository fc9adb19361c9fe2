#include "apt/factors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace apt {

namespace {

void require_same_calendar(const RawSeries& a, const RawSeries& b, const char* what) {
    if (a.size() != b.size()) {
        throw DataError(std::string(what) + ": length mismatch between '" + a.id() + "' (" +
                        std::to_string(a.size()) + ") and '" + b.id() + "' (" + std::to_string(b.size()) + ")");
    }
    if (a.dates() != b.dates()) {
        throw DataError(std::string(what) + ": '" + a.id() + "' and '" + b.id() + "' are on different calendars");
    }
}

void require_positive(const RawSeries& s, const char* what) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(s.values()[i] > 0.0)) {
            throw DataError(std::string(what) + ": nonpositive value in '" + s.id() + "' on " +
                            format_date(s.dates()[i]));
        }
    }
}

RawSeries scaled(const RawSeries& s, double factor) {
    std::vector<double> v(s.values());
    for (auto& x : v) {
        x *= factor;
    }
    return RawSeries(s.id(), s.dates(), std::move(v));
}

/// Restricts every series to the dates they all share.
std::vector<RawSeries> common_dates(const std::vector<RawSeries>& in) {
    std::vector<Date> shared = in.front().dates();
    for (std::size_t i = 1; i < in.size(); ++i) {
        std::vector<Date> next;
        std::set_intersection(shared.begin(), shared.end(), in[i].dates().begin(), in[i].dates().end(),
                              std::back_inserter(next));
        shared = std::move(next);
    }
    std::vector<RawSeries> out;
    for (const auto& s : in) {
        std::vector<double> v;
        v.reserve(shared.size());
        std::size_t cursor = 0;
        for (const auto& d : shared) {
            while (s.dates()[cursor] < d) {
                ++cursor;
            }
            v.push_back(s.values()[cursor]);
        }
        out.emplace_back(s.id(), shared, std::move(v));
    }
    return out;
}

const std::string* find_param(const FactorSpec& spec, const std::string& key) {
    auto it = spec.parameters.find(key);
    return it == spec.parameters.end() ? nullptr : &it->second;
}

double param_double(const FactorSpec& spec, const std::string& key, double fallback) {
    const auto* p = find_param(spec, key);
    if (!p) {
        return fallback;
    }
    try {
        std::size_t used = 0;
        double v = std::stod(*p, &used);
        if (used != p->size()) {
            throw std::invalid_argument(*p);
        }
        return v;
    } catch (const std::exception&) {
        throw DataError("factor '" + spec.id + "': parameter " + key + "='" + *p + "' is not a number");
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string> split_trimmed(std::string_view text, char sep) {
    std::vector<std::string> out;
    if (trim(text).empty()) {
        return out;
    }
    while (true) {
        auto pos = text.find(sep);
        out.emplace_back(trim(text.substr(0, pos)));
        if (pos == std::string_view::npos) {
            break;
        }
        text.remove_prefix(pos + 1);
    }
    return out;
}

std::size_t arity(FactorRecipe recipe) {
    switch (recipe) {
        case FactorRecipe::index_return:
        case FactorRecipe::volatility_change:
            return 1;
        default:
            return 2;
    }
}

}  // namespace

RawSeries per_period_rate(const RawSeries& annual_rate, const FactorContext& context) {
    if (!(context.rate_divisor > 0.0)) {
        throw std::invalid_argument("rate divisor must be positive");
    }
    return scaled(annual_rate, context.rate_scale / context.rate_divisor);
}

RawSeries build_excess_market(const RawSeries& market_returns, const RawSeries& risk_free) {
    require_same_calendar(market_returns, risk_free, "excess market");
    std::vector<double> v(market_returns.size());
    for (std::size_t t = 0; t < v.size(); ++t) {
        v[t] = market_returns.values()[t] - risk_free.values()[t];
    }
    return RawSeries(market_returns.id(), market_returns.dates(), std::move(v));
}

RawSeries build_spread(const RawSeries& long_leg, const RawSeries& short_leg, SpreadKind kind) {
    require_same_calendar(long_leg, short_leg, "spread");
    if (kind == SpreadKind::log) {
        require_positive(long_leg, "log spread");
        require_positive(short_leg, "log spread");
    }
    std::vector<double> v(long_leg.size());
    for (std::size_t t = 0; t < v.size(); ++t) {
        const double a = long_leg.values()[t];
        const double b = short_leg.values()[t];
        v[t] = kind == SpreadKind::log ? std::log(a) - std::log(b) : a - b;
    }
    return RawSeries(long_leg.id(), long_leg.dates(), std::move(v));
}

UiState::UiState(int window_k) : window_k_(window_k) {
    if (window_k < 1) {
        throw std::invalid_argument("UI window_k must be >= 1");
    }
}

std::optional<double> UiState::update(double inflation, double risk_free) {
    std::optional<double> out;
    if (static_cast<int>(history_.size()) == window_k_) {
        // summed afresh each period so a constant input yields an exact zero
        const double ex_ante_real = std::accumulate(history_.begin(), history_.end(), 0.0) / window_k_;
        const double expected_inflation = risk_free - ex_ante_real;
        out = inflation - expected_inflation;
    }
    history_.push_back(risk_free - inflation);
    if (static_cast<int>(history_.size()) > window_k_) {
        history_.pop_front();
    }
    return out;
}

RawSeries build_ui(const RawSeries& inflation, const RawSeries& risk_free, int window_k) {
    require_same_calendar(inflation, risk_free, "unexpected inflation");
    if (window_k < 1) {
        throw std::invalid_argument("UI window_k must be >= 1");
    }
    if (inflation.size() <= static_cast<std::size_t>(window_k)) {
        throw DataError("unexpected inflation: " + std::to_string(inflation.size()) +
                        " observations, need more than window_k=" + std::to_string(window_k));
    }
    UiState state(window_k);
    std::vector<Date> dates;
    std::vector<double> v;
    for (std::size_t t = 0; t < inflation.size(); ++t) {
        if (auto ui = state.update(inflation.values()[t], risk_free.values()[t])) {
            dates.push_back(inflation.dates()[t]);
            v.push_back(*ui);
        }
    }
    return RawSeries(inflation.id(), std::move(dates), std::move(v));
}

RawSeries build_vix_factor(const RawSeries& vix_levels, VolatilityTransform transform) {
    require_positive(vix_levels, "volatility factor");
    switch (transform) {
        case VolatilityTransform::level:
            return vix_levels;
        case VolatilityTransform::log_diff:
            return to_returns(vix_levels, ReturnKind::log);
        case VolatilityTransform::diff: {
            if (vix_levels.size() < 2) {
                throw DataError("volatility factor: at least two observations needed");
            }
            const auto& p = vix_levels.values();
            std::vector<double> v(p.size() - 1);
            for (std::size_t t = 1; t < p.size(); ++t) {
                v[t - 1] = p[t] - p[t - 1];
            }
            return RawSeries(vix_levels.id(), {vix_levels.dates().begin() + 1, vix_levels.dates().end()},
                             std::move(v));
        }
    }
    throw std::logic_error("unhandled volatility transform");
}

RawSeries demean(const RawSeries& series) {
    if (series.empty()) {
        return series;
    }
    const double mean = std::accumulate(series.values().begin(), series.values().end(), 0.0) /
                        static_cast<double>(series.size());
    std::vector<double> v(series.values());
    for (auto& x : v) {
        x -= mean;
    }
    return RawSeries(series.id(), series.dates(), std::move(v));
}

RawSeries build_factor(const FactorSpec& spec, const std::map<std::string, RawSeries>& inputs,
                       const FactorContext& context) {
    if (spec.inputs.size() != arity(spec.recipe)) {
        throw DataError("factor '" + spec.id + "': recipe " + std::string(to_string(spec.recipe)) + " takes " +
                        std::to_string(arity(spec.recipe)) + " input(s), got " + std::to_string(spec.inputs.size()));
    }
    std::vector<RawSeries> raw;
    for (const auto& name : spec.inputs) {
        auto it = inputs.find(name);
        if (it == inputs.end()) {
            throw DataError("factor '" + spec.id + "': input series '" + name + "' not found");
        }
        raw.push_back(it->second);
    }
    const double leg_scale = param_double(spec, "scale", 1.0);

    RawSeries out;
    switch (spec.recipe) {
        case FactorRecipe::excess_return: {
            const auto* input = find_param(spec, "input");
            RawSeries market = (input && *input == "returns") ? raw[0] : to_returns(raw[0], context.return_kind);
            auto joined = common_dates({market, per_period_rate(raw[1], context)});
            out = build_excess_market(joined[0], joined[1]);
            break;
        }
        case FactorRecipe::index_return:
            out = to_returns(raw[0], context.return_kind);
            break;
        case FactorRecipe::forward_spread:
        case FactorRecipe::forward_premium: {
            auto joined = common_dates(raw);
            const bool log_kind = param_double(spec, "log", 1.0) != 0.0;
            out = build_spread(joined[0], joined[1], log_kind ? SpreadKind::log : SpreadKind::arithmetic);
            break;
        }
        case FactorRecipe::yield_spread:
        case FactorRecipe::credit_spread: {
            auto joined = common_dates({scaled(raw[0], leg_scale), scaled(raw[1], leg_scale)});
            const bool log_kind = param_double(spec, "log", 0.0) != 0.0;
            out = build_spread(joined[0], joined[1], log_kind ? SpreadKind::log : SpreadKind::arithmetic);
            break;
        }
        case FactorRecipe::unexpected_inflation: {
            const double k = param_double(spec, "window_k", 60.0);
            if (k < 1.0 || k != std::floor(k)) {
                throw DataError("factor '" + spec.id + "': window_k must be a positive integer");
            }
            auto joined = common_dates({scaled(raw[0], leg_scale), per_period_rate(raw[1], context)});
            out = build_ui(joined[0], joined[1], static_cast<int>(k));
            break;
        }
        case FactorRecipe::volatility_change: {
            const auto* t = find_param(spec, "transform");
            out = build_vix_factor(raw[0], t ? parse_volatility_transform(*t) : VolatilityTransform::log_diff);
            break;
        }
    }
    if (param_double(spec, "demean", 0.0) != 0.0) {
        out = demean(out);
    }
    return out.renamed(spec.id);
}

FactorRecipe parse_recipe(std::string_view name) {
    static const std::pair<std::string_view, FactorRecipe> table[] = {
        {"excess_return", FactorRecipe::excess_return},
        {"index_return", FactorRecipe::index_return},
        {"forward_spread", FactorRecipe::forward_spread},
        {"yield_spread", FactorRecipe::yield_spread},
        {"credit_spread", FactorRecipe::credit_spread},
        {"forward_premium", FactorRecipe::forward_premium},
        {"unexpected_inflation", FactorRecipe::unexpected_inflation},
        {"volatility_change", FactorRecipe::volatility_change},
    };
    for (const auto& [key, recipe] : table) {
        if (key == name) {
            return recipe;
        }
    }
    throw DataError("unknown factor recipe '" + std::string(name) + "'");
}

std::string_view to_string(FactorRecipe recipe) {
    switch (recipe) {
        case FactorRecipe::excess_return:
            return "excess_return";
        case FactorRecipe::index_return:
            return "index_return";
        case FactorRecipe::forward_spread:
            return "forward_spread";
        case FactorRecipe::yield_spread:
            return "yield_spread";
        case FactorRecipe::credit_spread:
            return "credit_spread";
        case FactorRecipe::forward_premium:
            return "forward_premium";
        case FactorRecipe::unexpected_inflation:
            return "unexpected_inflation";
        case FactorRecipe::volatility_change:
            return "volatility_change";
    }
    return "?";
}

VolatilityTransform parse_volatility_transform(std::string_view name) {
    if (name == "log_diff") {
        return VolatilityTransform::log_diff;
    }
    if (name == "diff") {
        return VolatilityTransform::diff;
    }
    if (name == "level") {
        return VolatilityTransform::level;
    }
    throw DataError("unknown volatility transform '" + std::string(name) + "'");
}

FactorSpec parse_factor_spec(const std::string& id, const std::string& text) {
    const auto open = text.find('(');
    const auto close = text.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open ||
        !trim(std::string_view(text).substr(close + 1)).empty()) {
        throw DataError("factor '" + id + "': expected recipe(inputs; key=value), got '" + text + "'");
    }
    FactorSpec spec;
    spec.id = id;
    spec.recipe = parse_recipe(trim(std::string_view(text).substr(0, open)));
    std::string_view body = std::string_view(text).substr(open + 1, close - open - 1);
    const auto semi = body.find(';');
    spec.inputs = split_trimmed(body.substr(0, semi), ',');
    if (semi != std::string_view::npos) {
        for (const auto& kv : split_trimmed(body.substr(semi + 1), ',')) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                throw DataError("factor '" + id + "': parameter '" + kv + "' is not key=value");
            }
            spec.parameters[std::string(trim(std::string_view(kv).substr(0, eq)))] =
                std::string(trim(std::string_view(kv).substr(eq + 1)));
        }
    }
    return spec;
}

}  // namespace apt
