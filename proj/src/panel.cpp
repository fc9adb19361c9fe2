#include "apt/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <unordered_set>

namespace apt {

bool parse_date(std::string_view text, Date& out) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        return false;
    }
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    auto field = [&](std::size_t pos, std::size_t len, auto& value) {
        const char* first = text.data() + pos;
        auto [ptr, ec] = std::from_chars(first, first + len, value);
        return ec == std::errc() && ptr == first + len;
    };
    if (!field(0, 4, y) || !field(5, 2, m) || !field(8, 2, d)) {
        return false;
    }
    Date parsed{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!parsed.ok()) {
        return false;
    }
    out = parsed;
    return true;
}

std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

long days_between(const Date& from, const Date& to) {
    return static_cast<long>((std::chrono::sys_days(to) - std::chrono::sys_days(from)).count());
}

RawSeries::RawSeries(std::string id, std::vector<Date> dates, std::vector<double> values)
    : id_(std::move(id)), dates_(std::move(dates)), values_(std::move(values)) {
    if (dates_.size() != values_.size()) {
        throw DataError("series '" + id_ + "': " + std::to_string(dates_.size()) + " dates but " +
                        std::to_string(values_.size()) + " values");
    }
    for (std::size_t i = 0; i < dates_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw DataError("series '" + id_ + "': non-finite value on " + format_date(dates_[i]));
        }
        if (i > 0 && !(dates_[i - 1] < dates_[i])) {
            if (dates_[i - 1] == dates_[i]) {
                throw DataError("series '" + id_ + "': duplicate date " + format_date(dates_[i]));
            }
            throw DataError("series '" + id_ + "': dates not increasing at " + format_date(dates_[i]));
        }
    }
}

RawSeries RawSeries::renamed(std::string id) const {
    RawSeries copy = *this;
    copy.id_ = std::move(id);
    return copy;
}

RawSeries to_returns(const RawSeries& series, ReturnKind kind) {
    if (series.size() < 2) {
        throw DataError("series '" + series.id() + "': at least two observations needed for returns");
    }
    const auto& p = series.values();
    if (kind == ReturnKind::log) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!(p[i] > 0.0)) {
                throw DataError("series '" + series.id() + "': nonpositive level on " +
                                format_date(series.dates()[i]) + " under log returns");
            }
        }
    }
    std::vector<Date> dates(series.dates().begin() + 1, series.dates().end());
    std::vector<double> out(p.size() - 1);
    for (std::size_t t = 1; t < p.size(); ++t) {
        out[t - 1] = kind == ReturnKind::log ? std::log(p[t] / p[t - 1]) : p[t] / p[t - 1] - 1.0;
    }
    return RawSeries(series.id(), std::move(dates), std::move(out));
}

Matrix excess(const Matrix& returns, const Vector& risk_free) {
    if (returns.rows() != risk_free.size()) {
        throw DataError("excess: " + std::to_string(returns.rows()) + " return rows but " +
                        std::to_string(risk_free.size()) + " risk-free observations");
    }
    return returns.colwise() - risk_free;
}

namespace {

void require_unique(const std::vector<std::string>& ids, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second) {
            throw DataError(std::string("duplicate ") + what + " id '" + id + "'");
        }
    }
}

}  // namespace

AlignedPanel::AlignedPanel(std::vector<Date> dates, Matrix excess_returns, std::vector<std::string> asset_ids,
                           Matrix factor_matrix, std::vector<std::string> factor_ids)
    : dates_(std::move(dates)),
      excess_returns_(std::move(excess_returns)),
      asset_ids_(std::move(asset_ids)),
      factors_(std::move(factor_matrix)),
      factor_ids_(std::move(factor_ids)) {
    const auto T = static_cast<Index>(dates_.size());
    if (excess_returns_.rows() != T || factors_.rows() != T) {
        throw DataError("panel: return rows, factor rows and dates must share the same length");
    }
    if (static_cast<Index>(asset_ids_.size()) != excess_returns_.cols() ||
        static_cast<Index>(factor_ids_.size()) != factors_.cols()) {
        throw DataError("panel: id lists do not match matrix widths");
    }
    if (factors_.cols() < 1 || excess_returns_.cols() < 1) {
        throw DataError("panel: need at least one asset and one factor");
    }
    if (factors_.cols() >= excess_returns_.cols()) {
        throw DataError("panel: factor count m=" + std::to_string(factors_.cols()) +
                        " must be smaller than asset count n=" + std::to_string(excess_returns_.cols()));
    }
    if (!excess_returns_.allFinite() || !factors_.allFinite()) {
        throw DataError("panel: non-finite entry");
    }
    for (std::size_t i = 1; i < dates_.size(); ++i) {
        if (!(dates_[i - 1] < dates_[i])) {
            throw DataError("panel: dates not strictly increasing at " + format_date(dates_[i]));
        }
    }
    require_unique(asset_ids_, "asset");
    require_unique(factor_ids_, "factor");
}

std::vector<TaggedSeries> AlignedPanel::to_series() const {
    std::vector<TaggedSeries> out;
    auto column = [&](const Matrix& m, Index j) {
        std::vector<double> v(m.rows());
        Eigen::Map<Vector>(v.data(), m.rows()) = m.col(j);
        return v;
    };
    for (Index j = 0; j < assets(); ++j) {
        out.push_back({RawSeries(asset_ids_[j], dates_, column(excess_returns_, j)), SeriesRole::asset});
    }
    for (Index j = 0; j < factor_count(); ++j) {
        out.push_back({RawSeries(factor_ids_[j], dates_, column(factors_, j)), SeriesRole::factor});
    }
    return out;
}

AlignedPanel AlignedPanel::slice(Index first, Index count) const {
    if (first < 0 || count < 1 || first + count > observations()) {
        throw std::out_of_range("panel slice out of range");
    }
    std::vector<Date> d(dates_.begin() + first, dates_.begin() + first + count);
    return AlignedPanel(std::move(d), excess_returns_.middleRows(first, count), asset_ids_,
                        factors_.middleRows(first, count), factor_ids_);
}

bool AlignedPanel::operator==(const AlignedPanel& other) const {
    return dates_ == other.dates_ && asset_ids_ == other.asset_ids_ && factor_ids_ == other.factor_ids_ &&
           excess_returns_ == other.excess_returns_ && factors_ == other.factors_;
}

AlignResult align(std::span<const TaggedSeries> series_list, const CalendarPolicy& policy) {
    if (series_list.empty()) {
        throw DataError("align: no series given");
    }
    if (policy.max_fill_gap < 0) {
        throw std::invalid_argument("align: max_fill_gap must be >= 0");
    }
    const std::size_t k = series_list.size();
    int rf_count = 0;
    for (const auto& s : series_list) {
        if (s.series.empty()) {
            throw DataError("align: series '" + s.series.id() + "' is empty");
        }
        rf_count += s.role == SeriesRole::risk_free;
    }
    if (rf_count > 1) {
        throw DataError("align: more than one risk-free series");
    }

    AlignmentReport report;
    std::vector<Date> calendar;
    // values[i][t] for series i on calendar[t]
    std::vector<std::vector<double>> values(k);

    if (policy.join_mode == JoinMode::intersection) {
        std::map<Date, std::size_t> counts;
        for (const auto& s : series_list) {
            for (const auto& d : s.series.dates()) {
                ++counts[d];
            }
        }
        for (const auto& [d, c] : counts) {
            if (c == k) {
                calendar.push_back(d);
            }
        }
        if (calendar.empty()) {
            throw DataError("align: series share no common dates");
        }
        std::set<Date> keep(calendar.begin(), calendar.end());
        for (std::size_t i = 0; i < k; ++i) {
            const auto& s = series_list[i].series;
            for (std::size_t t = 0; t < s.size(); ++t) {
                if (keep.count(s.dates()[t])) {
                    values[i].push_back(s.values()[t]);
                } else {
                    report.push_back({s.dates()[t], s.id(), AlignAction::dropped});
                }
            }
        }
    } else {
        Date first = series_list[0].series.dates().front();
        Date last = series_list[0].series.dates().back();
        std::set<Date> all;
        for (const auto& s : series_list) {
            first = std::max(first, s.series.dates().front());
            last = std::min(last, s.series.dates().back());
            all.insert(s.series.dates().begin(), s.series.dates().end());
        }
        for (const auto& d : all) {
            if (first <= d && d <= last) {
                calendar.push_back(d);
            }
        }
        if (calendar.empty()) {
            throw DataError("align: series do not overlap in time");
        }
        for (std::size_t i = 0; i < k; ++i) {
            const auto& s = series_list[i].series;
            for (std::size_t t = 0; t < s.size(); ++t) {
                const Date& d = s.dates()[t];
                if (d < first || last < d) {
                    report.push_back({d, s.id(), AlignAction::dropped});
                }
            }
            std::size_t cursor = 0;
            for (const auto& d : calendar) {
                while (cursor < s.size() && s.dates()[cursor] < d) {
                    ++cursor;
                }
                if (cursor < s.size() && s.dates()[cursor] == d) {
                    values[i].push_back(s.values()[cursor]);
                    continue;
                }
                // cursor > 0 because calendar starts at or after this series' first date
                const Date& source = s.dates()[cursor - 1];
                const long gap = days_between(source, d);
                if (gap > policy.max_fill_gap) {
                    throw DataError("align: series '" + s.id() + "' missing on " + format_date(d) + ", last value " +
                                    std::to_string(gap) + " days earlier exceeds max_fill_gap=" +
                                    std::to_string(policy.max_fill_gap));
                }
                values[i].push_back(s.values()[cursor - 1]);
                report.push_back({d, s.id(), AlignAction::filled});
            }
        }
    }

    for (const auto& d : calendar) {
        report.push_back({d, "*", AlignAction::kept});
    }
    std::stable_sort(report.begin(), report.end(),
                     [](const AlignmentEntry& a, const AlignmentEntry& b) { return a.date < b.date; });

    const auto T = static_cast<Index>(calendar.size());
    std::vector<std::string> asset_ids;
    std::vector<std::string> factor_ids;
    std::vector<std::size_t> asset_idx;
    std::vector<std::size_t> factor_idx;
    std::optional<std::size_t> rf_idx;
    for (std::size_t i = 0; i < k; ++i) {
        switch (series_list[i].role) {
            case SeriesRole::asset:
                asset_ids.push_back(series_list[i].series.id());
                asset_idx.push_back(i);
                break;
            case SeriesRole::factor:
                factor_ids.push_back(series_list[i].series.id());
                factor_idx.push_back(i);
                break;
            case SeriesRole::risk_free:
                rf_idx = i;
                break;
        }
    }
    auto gather = [&](const std::vector<std::size_t>& idx) {
        Matrix m(T, static_cast<Index>(idx.size()));
        for (std::size_t j = 0; j < idx.size(); ++j) {
            m.col(static_cast<Index>(j)) = Eigen::Map<const Vector>(values[idx[j]].data(), T);
        }
        return m;
    };
    Matrix returns = gather(asset_idx);
    if (rf_idx) {
        returns = excess(returns, Eigen::Map<const Vector>(values[*rf_idx].data(), T));
    }
    AlignedPanel panel(std::move(calendar), std::move(returns), std::move(asset_ids), gather(factor_idx),
                       std::move(factor_ids));
    return {std::move(panel), std::move(report)};
}

std::string_view to_string(AlignAction action) {
    switch (action) {
        case AlignAction::kept:
            return "kept";
        case AlignAction::dropped:
            return "dropped";
        case AlignAction::filled:
            return "filled";
    }
    return "?";
}

std::string_view to_string(JoinMode mode) {
    return mode == JoinMode::intersection ? "intersection" : "union_with_forward_fill";
}

JoinMode parse_join_mode(std::string_view text) {
    if (text == "intersection") {
        return JoinMode::intersection;
    }
    if (text == "union_with_forward_fill" || text == "forward_fill") {
        return JoinMode::union_with_forward_fill;
    }
    throw std::invalid_argument("unknown join mode '" + std::string(text) + "'");
}

ReturnKind parse_return_kind(std::string_view text) {
    if (text == "log") {
        return ReturnKind::log;
    }
    if (text == "simple") {
        return ReturnKind::simple;
    }
    throw std::invalid_argument("unknown return kind '" + std::string(text) + "'");
}

}  // namespace apt
