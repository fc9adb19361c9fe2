#include "apt/fdist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "apt/common.hpp"

namespace apt {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kEps = 1e-16;
constexpr int kMaxIterations = 100000;

/// Continued fraction for I_x(a,b); valid and fast when x < (a+1)/(a+b+2).
double beta_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) {
        d = kTiny;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) {
            return h;
        }
    }
    throw ConvergenceError("incomplete beta continued fraction did not converge (a=" + std::to_string(a) +
                           ", b=" + std::to_string(b) + ", x=" + std::to_string(x) + ")");
}

/// I_x(a,b) with the complement y = 1 - x supplied separately to keep precision near x = 1.
double regularized_beta(double a, double b, double x, double y) {
    if (x <= 0.0) {
        return 0.0;
    }
    if (y <= 0.0) {
        return 1.0;
    }
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_fraction(b, a, y) / b;
}

void check_df(double df1, double df2) {
    if (!(df1 > 0.0) || !(df2 > 0.0) || !std::isfinite(df1) || !std::isfinite(df2)) {
        throw std::invalid_argument("F distribution: degrees of freedom must be positive (got " +
                                    std::to_string(df1) + ", " + std::to_string(df2) + ")");
    }
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::invalid_argument("incomplete beta: shape parameters must be positive");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::invalid_argument("incomplete beta: x must lie in [0, 1]");
    }
    return regularized_beta(a, b, x, 1.0 - x);
}

double f_upper_tail(double x, double df1, double df2) {
    check_df(df1, df2);
    if (std::isnan(x)) {
        throw std::invalid_argument("F upper tail: x is NaN");
    }
    if (x <= 0.0) {
        return 1.0;
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    // P(F > x) = I_w(df2/2, df1/2) with w = df2 / (df2 + df1 x)
    const double denom = df2 + df1 * x;
    const double w = df2 / denom;
    const double w_complement = df1 * x / denom;
    return regularized_beta(df2 / 2.0, df1 / 2.0, w, w_complement);
}

double f_quantile(double p, double df1, double df2) {
    check_df(df1, df2);
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("F quantile: p must lie in (0, 1)");
    }
    const double target = 1.0 - p;
    auto excess_tail = [&](double x) { return f_upper_tail(x, df1, df2) - target; };

    double lo = 0.0;
    double hi = 1.0;
    while (excess_tail(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) {
            throw ConvergenceError("F quantile: could not bracket p=" + std::to_string(p));
        }
    }
    std::uintmax_t iterations = 500;
    boost::math::tools::eps_tolerance<double> tol(50);
    const auto [a, b] = boost::math::tools::toms748_solve(excess_tail, lo, hi, excess_tail(lo), excess_tail(hi),
                                                          tol, iterations);
    if (iterations >= 500) {
        throw ConvergenceError("F quantile: root search did not converge for p=" + std::to_string(p));
    }
    const double x = 0.5 * (a + b);
    if (std::fabs(b - a) > 1e-10 * std::max(1.0, std::fabs(x))) {
        throw ConvergenceError("F quantile: bracket did not shrink below tolerance for p=" + std::to_string(p));
    }
    return x;
}

}  // namespace apt
