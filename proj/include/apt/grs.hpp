#pragma once

#include "apt/fmb.hpp"

namespace apt {

/// Generalized GRS test of H0: alpha = 0 against F(n, T - n - m).
struct GrsResult {
    double statistic = 0.0;
    int df1 = 0;
    int df2 = 0;
    double p_value = 1.0;
    double crit_5pct = 0.0;
    double crit_10pct = 0.0;
    bool regularized = false;  ///< sigma_hat needed a ridge
    bool low_df = false;       ///< df2 below kLowDfThreshold
};

inline constexpr int kLowDfThreshold = 30;

/// Critical values of F(df1, df2) at the 5% and 10% levels.
struct GrsCriticalValues {
    double crit_5pct;
    double crit_10pct;
};

GrsCriticalValues grs_critical_values(int df1, int df2);

/**
 * @brief GRS statistic from a first-pass fit.
 *
 *   T (T - n - m) / (n (T - m - 1)) * (1 + Fbar' Omega^-1 Fbar)^-1 * alpha' Sigma^-1 alpha
 *
 * Quadratic forms use Cholesky factors. Omega must be nonsingular
 * (SingularMatrixError otherwise); Sigma follows the ridge rule of
 * CovarianceFactor. Pass `critical` to reuse critical values across
 * windows of equal size.
 */
GrsResult grs_statistic(const FirstPassFit& fit, const GrsCriticalValues* critical = nullptr);

}  // namespace apt
