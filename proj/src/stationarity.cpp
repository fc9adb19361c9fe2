#include "apt/stationarity.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "apt/common.hpp"

namespace apt {

namespace {

int deterministic_columns(Deterministic d) {
    switch (d) {
        case Deterministic::none:
            return 0;
        case Deterministic::constant:
            return 1;
        case Deterministic::constant_trend:
            return 2;
    }
    return 0;
}

/**
 * Design for rows t = first..N-1 of the differenced equation. Column order is
 * [deterministic..., y_{t-1}, dy_{t-1}, ..., dy_{t-lags}]; every
 * smaller lag model is a leading block of columns.
 */
void build_regression(std::span<const double> y, int first, int lags, Deterministic d, Matrix& x, Vector& dy) {
    const Index N = static_cast<Index>(y.size());
    const Index rows = N - first;
    const int det = deterministic_columns(d);
    x.resize(rows, det + 1 + lags);
    dy.resize(rows);
    for (Index r = 0; r < rows; ++r) {
        const Index t = first + r;
        dy(r) = y[t] - y[t - 1];
        Index c = 0;
        if (det >= 1) {
            x(r, c++) = 1.0;
        }
        if (det >= 2) {
            x(r, c++) = static_cast<double>(t);
        }
        x(r, c++) = y[t - 1];
        for (int k = 1; k <= lags; ++k) {
            x(r, c++) = y[t - k] - y[t - k - 1];
        }
    }
}

void check_input(std::span<const double> series, int max_lag) {
    if (max_lag < 0) {
        throw std::invalid_argument("ADF: max_lag must be >= 0");
    }
    if (series.size() <= static_cast<std::size_t>(max_lag) + 10) {
        throw DataError("ADF: series of length " + std::to_string(series.size()) + " too short for max_lag " +
                        std::to_string(max_lag));
    }
    for (double v : series) {
        if (!std::isfinite(v)) {
            throw DataError("ADF: series contains non-finite values");
        }
    }
    bool constant = true;
    for (double v : series) {
        constant = constant && v == series[0];
    }
    if (constant) {
        throw SingularMatrixError("ADF: constant series");
    }
}

PValueBand band_for(double stat, const std::array<double, 3>& cv) {
    if (stat < cv[0]) {
        return PValueBand::below_1pct;
    }
    if (stat < cv[1]) {
        return PValueBand::below_5pct;
    }
    if (stat < cv[2]) {
        return PValueBand::below_10pct;
    }
    return PValueBand::not_significant;
}

}  // namespace

int schwert_max_lag(std::size_t length) {
    return static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(length) / 100.0, 0.25)));
}

std::array<double, 3> adf_critical_values(int observations, Deterministic deterministic) {
    // rows: 1%, 5%, 10%; columns: beta_inf, beta_1, beta_2, beta_3
    static constexpr double kNone[3][4] = {
        {-2.56574, -2.2358, -3.627, 0.0},
        {-1.94100, -0.2686, -3.365, 31.223},
        {-1.61682, 0.2656, -2.714, 25.364},
    };
    static constexpr double kConstant[3][4] = {
        {-3.43035, -6.5393, -16.786, -79.433},
        {-2.86154, -2.8903, -4.234, -40.040},
        {-2.56677, -1.5384, -2.809, 0.0},
    };
    static constexpr double kTrend[3][4] = {
        {-3.95877, -9.0531, -28.428, -134.155},
        {-3.41049, -4.3904, -9.036, -45.374},
        {-3.12705, -2.5856, -3.925, -22.380},
    };
    const auto& table = deterministic == Deterministic::none       ? kNone
                        : deterministic == Deterministic::constant ? kConstant
                                                                   : kTrend;
    if (observations < 1) {
        throw std::invalid_argument("ADF critical values: observations must be positive");
    }
    const double inv = 1.0 / static_cast<double>(observations);
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i) {
        out[i] = table[i][0] + inv * (table[i][1] + inv * (table[i][2] + inv * table[i][3]));
    }
    return out;
}

int select_lag_bic(std::span<const double> series, int max_lag, Deterministic deterministic) {
    check_input(series, max_lag);
    Matrix x;
    Vector dy;
    build_regression(series, max_lag + 1, max_lag, deterministic, x, dy);
    const Index rows = x.rows();
    const int det = deterministic_columns(deterministic);

    // Householder QR without pivoting keeps column order, so the residual sum of
    // squares of the model with its first k columns is the tail norm of Q'dy.
    Eigen::HouseholderQR<Matrix> qr(x);
    const Vector qty = qr.householderQ().transpose() * dy;
    const auto r_diag = qr.matrixQR().diagonal().cwiseAbs();
    const double r_scale = r_diag.maxCoeff();

    int best = 0;
    double best_bic = std::numeric_limits<double>::infinity();
    for (int lag = 0; lag <= max_lag; ++lag) {
        const Index k = det + 1 + lag;
        if (r_diag.head(k).minCoeff() <= 1e-12 * r_scale) {
            break;  // nested models only get more collinear
        }
        const double ssr = qty.tail(rows - k).squaredNorm();
        if (!(ssr > 0.0)) {
            throw SingularMatrixError("ADF: perfect fit in lag selection");
        }
        const double nobs = static_cast<double>(rows);
        const double bic = nobs * std::log(ssr / nobs) + static_cast<double>(k) * std::log(nobs);
        if (bic < best_bic) {
            best_bic = bic;
            best = lag;
        }
    }
    if (!std::isfinite(best_bic)) {
        throw SingularMatrixError("ADF: singular regressor matrix");
    }
    return best;
}

AdfResult adf_test_fixed_lag(std::span<const double> series, int lag, Deterministic deterministic) {
    check_input(series, lag);
    Matrix x;
    Vector dy;
    build_regression(series, lag + 1, lag, deterministic, x, dy);
    const Index rows = x.rows();
    const Index k = x.cols();
    const Index gamma = deterministic_columns(deterministic);

    Eigen::ColPivHouseholderQR<Matrix> pivoted(x);
    if (pivoted.rank() < k) {
        throw SingularMatrixError("ADF: singular regressor matrix");
    }
    Eigen::HouseholderQR<Matrix> qr(x);
    const Vector coef = qr.solve(dy);
    const double ssr = (dy - x * coef).squaredNorm();
    const double s2 = ssr / static_cast<double>(rows - k);
    const Matrix r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Matrix r_inv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));
    const double var_gamma = s2 * r_inv.row(gamma).squaredNorm();
    if (!(var_gamma > 0.0)) {
        throw SingularMatrixError("ADF: zero residual variance");
    }

    AdfResult out;
    out.statistic = coef(gamma) / std::sqrt(var_gamma);
    out.chosen_lag = lag;
    out.deterministic = deterministic;
    out.observations = static_cast<int>(rows);
    out.critical_values = adf_critical_values(out.observations, deterministic);
    out.p_value_band = band_for(out.statistic, out.critical_values);
    out.reject_at_1pct = out.statistic < out.critical_values[0];
    out.reject_at_5pct = out.statistic < out.critical_values[1];
    out.reject_at_10pct = out.statistic < out.critical_values[2];
    return out;
}

AdfResult adf_test(std::span<const double> series, std::optional<int> max_lag, Deterministic deterministic) {
    const int cap = max_lag.value_or(schwert_max_lag(series.size()));
    const int lag = select_lag_bic(series, cap, deterministic);
    return adf_test_fixed_lag(series, lag, deterministic);
}

Deterministic parse_deterministic(std::string_view text) {
    if (text == "none" || text == "n") {
        return Deterministic::none;
    }
    if (text == "constant" || text == "c") {
        return Deterministic::constant;
    }
    if (text == "constant_trend" || text == "ct") {
        return Deterministic::constant_trend;
    }
    throw std::invalid_argument("unknown deterministic term '" + std::string(text) + "'");
}

std::string_view to_string(Deterministic deterministic) {
    switch (deterministic) {
        case Deterministic::none:
            return "none";
        case Deterministic::constant:
            return "constant";
        case Deterministic::constant_trend:
            return "constant_trend";
    }
    return "?";
}

std::string_view to_string(PValueBand band) {
    switch (band) {
        case PValueBand::below_1pct:
            return "<0.01";
        case PValueBand::below_5pct:
            return "<0.05";
        case PValueBand::below_10pct:
            return "<0.10";
        case PValueBand::not_significant:
            return ">=0.10";
    }
    return "?";
}

}  // namespace apt
