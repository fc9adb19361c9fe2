#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "apt/panel.hpp"

namespace apt {

/// Column mapping for a wide CSV file: one date column plus value columns.
struct CsvSchema {
    std::string date_column = "date";
    std::vector<std::string> value_columns;  ///< empty selects every non-date column
    char delimiter = ',';
};

/**
 * Reads one RawSeries per value column. Rows are sorted by date; duplicate dates,
 * unparseable dates, and blank or non-numeric cells raise DataError with the
 * offending row number (1-based, header is row 1) and column name.
 */
std::vector<RawSeries> load_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// Splits one delimited line; surrounding whitespace and double quotes are stripped.
std::vector<std::string> split_csv_line(const std::string& line, char delimiter);

/// Shortest decimal text that round-trips the double exactly.
std::string format_double(double value);

void write_series_csv(std::ostream& out, const RawSeries& series);
void write_alignment_report(std::ostream& out, const AlignmentReport& report);

/// Wide panel file: date, asset columns, factor columns.
void write_panel_csv(std::ostream& out, const AlignedPanel& panel);

/// Reads a panel written by write_panel_csv; `asset_ids` and `factor_ids` pick the column roles.
AlignedPanel read_panel_csv(const std::filesystem::path& path, const std::vector<std::string>& asset_ids,
                            const std::vector<std::string>& factor_ids);

}  // namespace apt
