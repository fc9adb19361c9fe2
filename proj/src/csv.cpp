#include "apt/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace apt {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

bool parse_number(std::string_view text, double& out) {
    if (text.empty()) {
        return false;
    }
    if (text.front() == '+') {
        text.remove_prefix(1);
    }
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                         const std::filesystem::path& path) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw DataError(path.string() + ": column '" + name + "' not found in header");
    }
    return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line, char delimiter) {
    std::vector<std::string> out;
    std::string_view rest(line);
    while (true) {
        auto pos = rest.find(delimiter);
        std::string_view cell = trim(rest.substr(0, pos));
        if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') {
            cell = cell.substr(1, cell.size() - 2);
        }
        out.emplace_back(cell);
        if (pos == std::string_view::npos) {
            break;
        }
        rest.remove_prefix(pos + 1);
    }
    return out;
}

std::vector<RawSeries> load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open file " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(path.string() + ": empty file");
    }
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
    }
    const auto header = split_csv_line(line, schema.delimiter);
    const std::size_t date_col = column_index(header, schema.date_column, path);

    std::vector<std::string> names = schema.value_columns;
    if (names.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (j != date_col) {
                names.push_back(header[j]);
            }
        }
    }
    if (names.empty()) {
        throw DataError(path.string() + ": no value columns");
    }
    std::vector<std::size_t> cols;
    for (const auto& name : names) {
        cols.push_back(column_index(header, name, path));
    }

    struct Row {
        Date date;
        std::size_t line_no;
        std::vector<double> values;
    };
    std::vector<Row> rows;
    std::vector<std::size_t> bad_dates;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split_csv_line(line, schema.delimiter);
        Row row;
        row.line_no = line_no;
        if (date_col >= cells.size() || !parse_date(cells[date_col], row.date)) {
            bad_dates.push_back(line_no);
            continue;
        }
        row.values.reserve(cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const std::size_t c = cols[j];
            double v = 0.0;
            if (c >= cells.size() || cells[c].empty()) {
                throw DataError(path.string() + ": row " + std::to_string(line_no) + ", column '" + names[j] +
                                "': blank value");
            }
            if (!parse_number(cells[c], v)) {
                throw DataError(path.string() + ": row " + std::to_string(line_no) + ", column '" + names[j] +
                                "': non-numeric value '" + cells[c] + "'");
            }
            row.values.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (!bad_dates.empty()) {
        std::ostringstream msg;
        msg << path.string() << ": unparseable date in row(s)";
        for (std::size_t i = 0; i < bad_dates.size() && i < 20; ++i) {
            msg << ' ' << bad_dates[i];
        }
        if (bad_dates.size() > 20) {
            msg << " ... (" << bad_dates.size() << " total)";
        }
        throw DataError(msg.str());
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].date == rows[i - 1].date) {
            throw DataError(path.string() + ": duplicate date " + format_date(rows[i].date) + " (rows " +
                            std::to_string(rows[i - 1].line_no) + " and " + std::to_string(rows[i].line_no) + ")");
        }
    }

    std::vector<Date> dates;
    dates.reserve(rows.size());
    for (const auto& r : rows) {
        dates.push_back(r.date);
    }
    std::vector<RawSeries> out;
    for (std::size_t j = 0; j < names.size(); ++j) {
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) {
            v.push_back(r.values[j]);
        }
        out.emplace_back(names[j], dates, std::move(v));
    }
    return out;
}

std::string format_double(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

void write_series_csv(std::ostream& out, const RawSeries& series) {
    out << "date," << series.id() << '\n';
    for (std::size_t t = 0; t < series.size(); ++t) {
        out << format_date(series.dates()[t]) << ',' << format_double(series.values()[t]) << '\n';
    }
}

void write_alignment_report(std::ostream& out, const AlignmentReport& report) {
    out << "date,series,action\n";
    for (const auto& e : report) {
        out << format_date(e.date) << ',' << e.series << ',' << to_string(e.action) << '\n';
    }
}

void write_panel_csv(std::ostream& out, const AlignedPanel& panel) {
    out << "date";
    for (const auto& id : panel.asset_ids()) {
        out << ',' << id;
    }
    for (const auto& id : panel.factor_ids()) {
        out << ',' << id;
    }
    out << '\n';
    for (Index t = 0; t < panel.observations(); ++t) {
        out << format_date(panel.dates()[t]);
        for (Index j = 0; j < panel.assets(); ++j) {
            out << ',' << format_double(panel.excess_returns()(t, j));
        }
        for (Index j = 0; j < panel.factor_count(); ++j) {
            out << ',' << format_double(panel.factors()(t, j));
        }
        out << '\n';
    }
}

AlignedPanel read_panel_csv(const std::filesystem::path& path, const std::vector<std::string>& asset_ids,
                            const std::vector<std::string>& factor_ids) {
    CsvSchema schema;
    schema.value_columns = asset_ids;
    schema.value_columns.insert(schema.value_columns.end(), factor_ids.begin(), factor_ids.end());
    const auto series = load_csv(path, schema);
    const auto T = static_cast<Index>(series.front().size());
    Matrix returns(T, static_cast<Index>(asset_ids.size()));
    Matrix factors(T, static_cast<Index>(factor_ids.size()));
    for (std::size_t j = 0; j < series.size(); ++j) {
        auto col = Eigen::Map<const Vector>(series[j].values().data(), T);
        if (j < asset_ids.size()) {
            returns.col(static_cast<Index>(j)) = col;
        } else {
            factors.col(static_cast<Index>(j - asset_ids.size())) = col;
        }
    }
    return AlignedPanel(series.front().dates(), std::move(returns), asset_ids, std::move(factors), factor_ids);
}

}  // namespace apt
