#pragma once

#include <chrono>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace apt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Calendar date of one observation (no time-of-day component).
using Date = std::chrono::year_month_day;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD). Returns false on malformed input.
bool parse_date(std::string_view text, Date& out);

/// Formats a date as YYYY-MM-DD.
std::string format_date(const Date& date);

/// Calendar days from `from` to `to`.
long days_between(const Date& from, const Date& to);

/// Malformed or inconsistent input data (files, series, schemas).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A matrix that must be inverted or factored is singular or rank deficient.
class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative numerical routine failed to converge.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace apt
