#pragma once

#include <span>
#include <string>
#include <vector>

#include "apt/common.hpp"

namespace apt {

/**
 * @brief A single named, dated time series (a price level, a rate, or a return).
 *
 * Dates are strictly increasing and every value is finite; the constructor
 * enforces both.
 */
class RawSeries {
public:
    RawSeries() = default;
    RawSeries(std::string id, std::vector<Date> dates, std::vector<double> values);

    const std::string& id() const { return id_; }
    const std::vector<Date>& dates() const { return dates_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    /// Same observations under a different id.
    RawSeries renamed(std::string id) const;

    bool operator==(const RawSeries&) const = default;

private:
    std::string id_;
    std::vector<Date> dates_;
    std::vector<double> values_;
};

enum class ReturnKind { log, simple };

/// Period-over-period returns; the output drops the first date.
RawSeries to_returns(const RawSeries& series, ReturnKind kind);

/// Excess returns: subtracts `risk_free[t]` from every entry of row t.
Matrix excess(const Matrix& returns, const Vector& risk_free);

enum class JoinMode { intersection, union_with_forward_fill };

struct CalendarPolicy {
    JoinMode join_mode = JoinMode::intersection;
    int max_fill_gap = 0;  ///< calendar days a value may be carried forward
};

enum class SeriesRole { asset, factor, risk_free };

struct TaggedSeries {
    RawSeries series;
    SeriesRole role;
};

enum class AlignAction { kept, dropped, filled };

/// One line of the alignment report. Kept dates are reported once with series "*".
struct AlignmentEntry {
    Date date;
    std::string series;
    AlignAction action;
};

using AlignmentReport = std::vector<AlignmentEntry>;

/**
 * @brief Date-indexed asset excess returns (T x n) and factor values (T x m).
 *
 * Immutable once built. Requires m >= 1, n > m, a common T, finite entries,
 * strictly increasing dates and unique ids.
 */
class AlignedPanel {
public:
    AlignedPanel(std::vector<Date> dates, Matrix excess_returns, std::vector<std::string> asset_ids,
                 Matrix factor_matrix, std::vector<std::string> factor_ids);

    const std::vector<Date>& dates() const { return dates_; }
    const Matrix& excess_returns() const { return excess_returns_; }
    const Matrix& factors() const { return factors_; }
    const std::vector<std::string>& asset_ids() const { return asset_ids_; }
    const std::vector<std::string>& factor_ids() const { return factor_ids_; }

    Index observations() const { return excess_returns_.rows(); }
    Index assets() const { return excess_returns_.cols(); }
    Index factor_count() const { return factors_.cols(); }

    /// Columns of the panel as dated series: assets first, then factors.
    std::vector<TaggedSeries> to_series() const;

    /// Rows [first, first + count).
    AlignedPanel slice(Index first, Index count) const;

    bool operator==(const AlignedPanel&) const;

private:
    std::vector<Date> dates_;
    Matrix excess_returns_;
    std::vector<std::string> asset_ids_;
    Matrix factors_;
    std::vector<std::string> factor_ids_;
};

struct AlignResult {
    AlignedPanel panel;
    AlignmentReport report;
};

/**
 * @brief Joins tagged series onto one calendar and builds a panel.
 *
 * At most one series may carry the risk_free role; when present the asset
 * columns are converted to excess returns after alignment and the risk-free
 * series itself does not enter the panel.
 */
AlignResult align(std::span<const TaggedSeries> series_list, const CalendarPolicy& policy);

std::string_view to_string(AlignAction action);
std::string_view to_string(JoinMode mode);
JoinMode parse_join_mode(std::string_view text);
ReturnKind parse_return_kind(std::string_view text);

}  // namespace apt
