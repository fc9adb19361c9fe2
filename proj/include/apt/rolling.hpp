#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "apt/fmb.hpp"
#include "apt/grs.hpp"
#include "apt/panel.hpp"

namespace apt {

/// Inclusive row range [start, end] of one window.
struct Window {
    Index start = 0;
    Index end = 0;
};

/**
 * @brief Overlapping fixed-width windows over T observations.
 *
 * floor((T - w) / step) + 1 windows; each window is stamped with the date of
 * its last (most recent) observation.
 */
struct WindowPlan {
    Index observations = 0;
    Index width = 0;
    Index step = 1;
    std::vector<Window> windows;
};

WindowPlan plan_windows(Index observations, Index width, Index step = 1);

struct RollOptions {
    int threads = 1;
    SecondPassOptions second_pass;
};

/// Per-window flags. A failed window carries NaN estimates and the error text.
struct WindowStatus {
    bool regularized = false;
    bool low_df = false;
    bool failed = false;
    std::string error;

    /// "ok", or a ';'-joined list of raised flags.
    std::string flags() const;
};

/**
 * @brief Per-window GRS results and premium estimates, in window order.
 *
 * ci_lower/ci_upper are windows x m matrices of lambda -/+ 1.96 robust SE.
 */
struct RollingSeries {
    std::vector<Date> dates;
    std::vector<Window> windows;
    std::vector<GrsResult> grs;
    std::vector<RiskPremiumEstimate> premiums;
    std::vector<WindowStatus> status;
    std::vector<std::string> factor_ids;
    Matrix ci_lower;
    Matrix ci_upper;

    std::size_t size() const { return dates.size(); }
    std::size_t flagged() const;
    std::size_t failed() const;

    /// lambda of one factor across windows.
    Vector lambda_series(std::string_view factor_id) const;
};

/**
 * Runs first pass, GRS and second pass on every window of the plan. Windows
 * are partitioned across `threads` workers writing into disjoint preallocated
 * slots, so the output does not depend on the worker count. Window failures
 * are recorded in `status` and never abort the sweep.
 */
RollingSeries roll(const AlignedPanel& panel, const WindowPlan& plan, const RollOptions& options = {});

/// Pearson correlation of two factors' lambda series over windows where both are finite.
double premium_correlation(const RollingSeries& series, std::string_view factor_a, std::string_view factor_b);

/// Pearson correlation of two equal-length vectors; throws on zero variance.
double pearson_correlation(const Vector& a, const Vector& b);

}  // namespace apt
