#pragma once

#include <optional>

#include "apt/common.hpp"
#include "apt/panel.hpp"

namespace apt {

/**
 * @brief Time-series (first-pass) regression of every asset on [1, F].
 *
 * The regressors are the same for every asset, so the equation-by-equation
 * OLS coefficients coincide with the joint GLS coefficients for any residual
 * weighting. Divisors: sigma_hat uses T - m - 1, factor_cov uses T.
 */
struct FirstPassFit {
    Vector alpha;        ///< n intercepts
    Matrix beta;         ///< n x m loadings
    Matrix residuals;    ///< T x n
    Matrix sigma_hat;    ///< n x n residual covariance
    Vector factor_mean;  ///< m
    Matrix factor_cov;   ///< m x m
    Index observations = 0;

    Index assets() const { return beta.rows(); }
    Index factor_count() const { return beta.cols(); }
};

/// Requires T > n + m + 1 and a full-column-rank [1, F]; throws SingularMatrixError otherwise.
FirstPassFit first_pass(const Eigen::Ref<const Matrix>& excess_returns, const Eigen::Ref<const Matrix>& factors);
FirstPassFit first_pass(const AlignedPanel& panel);

struct SecondPassOptions {
    bool shanken = false;    ///< errors-in-variables correction of the covariance
    bool intercept = false;  ///< diagnostic: add a cross-sectional intercept
};

struct RiskPremiumEstimate {
    Vector lambda;            ///< m premiums
    Vector robust_se;         ///< m
    Matrix cov_lambda;        ///< m x m
    Vector expected_premium;  ///< m sample factor means over the same window
    std::optional<double> intercept;
    std::optional<double> intercept_se;
    bool regularized = false;
    double ridge = 0.0;
};

/**
 * @brief Cross-sectional GLS regression of mean excess returns on the loadings.
 *
 * lambda = (B' S^-1 B)^-1 B' S^-1 mean_excess with S = sigma_hat (ridge-regularized
 * when ill-conditioned). No intercept unless requested. Standard errors come from
 * the HC1 heteroskedasticity-robust covariance of the whitened regression.
 */
RiskPremiumEstimate second_pass(const FirstPassFit& fit, const Vector& mean_excess,
                                const SecondPassOptions& options = {});

/// Column means of the excess-return block.
Vector mean_excess(const Eigen::Ref<const Matrix>& excess_returns);

/// Per-factor sample means over the panel.
Vector expected_premiums(const AlignedPanel& panel);

}  // namespace apt
