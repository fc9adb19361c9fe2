#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

namespace apt {

/// Deterministic terms of the ADF regression.
enum class Deterministic { none, constant, constant_trend };

enum class PValueBand { below_1pct, below_5pct, below_10pct, not_significant };

/**
 * @brief Outcome of an augmented Dickey-Fuller test.
 *
 * `critical_values` holds the 1%, 5% and 10% response-surface values for
 * the regression's sample size.
 */
struct AdfResult {
    double statistic = 0.0;  ///< t-ratio on the lagged level
    int chosen_lag = 0;
    Deterministic deterministic = Deterministic::constant;
    PValueBand p_value_band = PValueBand::not_significant;
    bool reject_at_1pct = false;
    bool reject_at_5pct = false;
    bool reject_at_10pct = false;
    std::array<double, 3> critical_values{};
    int observations = 0;  ///< rows of the final regression
};

/// floor(12 * (T / 100)^(1/4))
int schwert_max_lag(std::size_t length);

/**
 * MacKinnon (2010) response-surface critical values at the 1%, 5% and 10%
 * levels for a regression with `observations` rows.
 */
std::array<double, 3> adf_critical_values(int observations, Deterministic deterministic);

/**
 * Lag in [0, max_lag] minimizing the BIC of the ADF regression. Every
 * candidate is fitted on the same sample, trimmed for the largest lag.
 * Requires length > max_lag + 10.
 */
int select_lag_bic(std::span<const double> series, int max_lag, Deterministic deterministic);

/**
 * Fits dy_t = [c] + [d t] + gamma y_{t-1} + sum_k phi_k dy_{t-k} + e_t with the
 * BIC lag (max_lag defaults to the Schwert rule) on the longest sample the lag
 * allows, and reports t(gamma). Throws SingularMatrixError for degenerate input
 * such as a constant series.
 */
AdfResult adf_test(std::span<const double> series, std::optional<int> max_lag = std::nullopt,
                   Deterministic deterministic = Deterministic::constant);

/// Same regression at a fixed lag, no selection.
AdfResult adf_test_fixed_lag(std::span<const double> series, int lag, Deterministic deterministic);

Deterministic parse_deterministic(std::string_view text);
std::string_view to_string(Deterministic deterministic);
std::string_view to_string(PValueBand band);

}  // namespace apt
