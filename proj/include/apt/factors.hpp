#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apt/panel.hpp"

namespace apt {

enum class FactorRecipe {
    excess_return,
    index_return,
    forward_spread,
    yield_spread,
    credit_spread,
    forward_premium,
    unexpected_inflation,
    volatility_change,
};

/**
 * @brief Definition of one risk factor in terms of raw input series.
 *
 * Inputs by recipe:
 *  - excess_return:        (market level, annualized risk-free rate)
 *  - index_return:         (index level)
 *  - forward_spread, forward_premium: (forward price, spot price)
 *  - yield_spread, credit_spread:     (long leg rate, short leg rate)
 *  - unexpected_inflation: (per-period inflation, annualized risk-free rate)
 *  - volatility_change:    (volatility index level)
 *
 * Recognized parameters: `log` (0/1, spreads), `scale` (multiplier applied to
 * rate legs), `window_k` (UI smoothing span), `transform` (log_diff, diff,
 * level), `input` (levels or returns for the market leg).
 */
struct FactorSpec {
    std::string id;
    FactorRecipe recipe;
    std::vector<std::string> inputs;
    std::map<std::string, std::string> parameters;
};

/// Conventions shared by every factor recipe in one run.
struct FactorContext {
    ReturnKind return_kind = ReturnKind::log;
    double rate_divisor = 245.0;  ///< annualized rate -> per-period rate
    double rate_scale = 1.0;      ///< e.g. 0.01 when rates are quoted in percent
};

/// Annualized rate series converted to per-period fractions: value * scale / divisor.
RawSeries per_period_rate(const RawSeries& annual_rate, const FactorContext& context);

/// f_t = r_mkt,t - r_f,t on identical calendars.
RawSeries build_excess_market(const RawSeries& market_returns, const RawSeries& risk_free);

enum class SpreadKind { arithmetic, log };

/// f_t = long_t - short_t, or ln(long_t) - ln(short_t) for the log kind.
RawSeries build_spread(const RawSeries& long_leg, const RawSeries& short_leg, SpreadKind kind);

/**
 * @brief Streaming state of the unexpected-inflation construction.
 *
 * Holds the trailing window of ex-post real rates r_f - I. The ex-ante real
 * rate for period t is the mean of the previous window_k ex-post values, the
 * expected inflation is r_f,t minus that mean, and the factor is realized
 * inflation less expected inflation.
 */
class UiState {
public:
    explicit UiState(int window_k);

    /// Feeds one period; returns the factor value once window_k prior periods are available.
    std::optional<double> update(double inflation, double risk_free);

    int window_k() const { return window_k_; }
    const std::deque<double>& history() const { return history_; }

private:
    int window_k_;
    std::deque<double> history_;
    double sum_ = 0.0;
};

/// Unexpected inflation. The first window_k dates are burn-in and are not emitted.
RawSeries build_ui(const RawSeries& inflation, const RawSeries& risk_free, int window_k);

enum class VolatilityTransform { log_diff, diff, level };

RawSeries build_vix_factor(const RawSeries& vix_levels, VolatilityTransform transform = VolatilityTransform::log_diff);

/// Subtracts the sample mean.
RawSeries demean(const RawSeries& series);

/// Builds one factor from named raw series. Inputs are joined on their common dates first.
RawSeries build_factor(const FactorSpec& spec, const std::map<std::string, RawSeries>& inputs,
                       const FactorContext& context);

FactorRecipe parse_recipe(std::string_view name);
std::string_view to_string(FactorRecipe recipe);
VolatilityTransform parse_volatility_transform(std::string_view name);

/// Parses "recipe(in1, in2; key=value, key=value)".
FactorSpec parse_factor_spec(const std::string& id, const std::string& text);

}  // namespace apt
