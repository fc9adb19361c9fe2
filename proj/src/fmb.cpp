#include "apt/fmb.hpp"

#include <string>

#include "apt/covariance.hpp"

namespace apt {

FirstPassFit first_pass(const Eigen::Ref<const Matrix>& excess_returns, const Eigen::Ref<const Matrix>& factors) {
    const Index T = excess_returns.rows();
    const Index n = excess_returns.cols();
    const Index m = factors.cols();
    if (factors.rows() != T) {
        throw DataError("first pass: returns have " + std::to_string(T) + " rows, factors " +
                        std::to_string(factors.rows()));
    }
    if (n < 1 || m < 1) {
        throw DataError("first pass: need at least one asset and one factor");
    }
    if (T <= n + m + 1) {
        throw DataError("first pass: T=" + std::to_string(T) + " must exceed n + m + 1 = " +
                        std::to_string(n + m + 1));
    }

    Matrix design(T, m + 1);
    design.col(0).setOnes();
    design.rightCols(m) = factors;
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (qr.rank() < m + 1) {
        throw SingularMatrixError("first pass: factor matrix with intercept is rank deficient (rank " +
                                  std::to_string(qr.rank()) + " < " + std::to_string(m + 1) + ")");
    }
    const Matrix coef = qr.solve(Matrix(excess_returns));  // (m+1) x n

    FirstPassFit fit;
    fit.observations = T;
    fit.alpha = coef.row(0).transpose();
    fit.beta = coef.bottomRows(m).transpose();
    fit.residuals = excess_returns - design * coef;
    fit.sigma_hat = (fit.residuals.transpose() * fit.residuals) / static_cast<double>(T - m - 1);
    fit.factor_mean = factors.colwise().mean().transpose();
    const Matrix centered = factors.rowwise() - fit.factor_mean.transpose();
    fit.factor_cov = (centered.transpose() * centered) / static_cast<double>(T);
    return fit;
}

FirstPassFit first_pass(const AlignedPanel& panel) {
    return first_pass(panel.excess_returns(), panel.factors());
}

RiskPremiumEstimate second_pass(const FirstPassFit& fit, const Vector& mean_excess,
                                const SecondPassOptions& options) {
    const Index n = fit.beta.rows();
    const Index m = fit.beta.cols();
    if (mean_excess.size() != n || fit.sigma_hat.rows() != n) {
        throw DataError("second pass: dimension mismatch between loadings, covariance and mean returns");
    }
    const Index k = m + (options.intercept ? 1 : 0);
    if (n < k) {
        throw DataError("second pass: " + std::to_string(n) + " assets cannot identify " + std::to_string(k) +
                        " cross-sectional coefficients");
    }

    Matrix regressors(n, k);
    if (options.intercept) {
        regressors.col(0).setOnes();
    }
    regressors.rightCols(m) = fit.beta;

    const CovarianceFactor sigma(fit.sigma_hat);
    const Matrix x = sigma.whiten(regressors);
    const Vector y = sigma.whiten(mean_excess);

    Eigen::ColPivHouseholderQR<Matrix> qr(x);
    if (qr.rank() < k) {
        throw SingularMatrixError("second pass: B' S^-1 B is singular (loadings rank " + std::to_string(qr.rank()) +
                                  " < " + std::to_string(k) + ")");
    }
    const Vector coef = qr.solve(y);
    const Vector resid = y - x * coef;

    // (X'X)^-1 from the triangular factor: X P = Q R  =>  (X'X)^-1 = P R^-1 R^-T P'
    const Matrix r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Matrix r_inv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));
    const Matrix xtx_inv_perm = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation();
    const Matrix xtx_inv = perm * xtx_inv_perm * perm.transpose();

    const Matrix meat = x.transpose() * resid.array().square().matrix().asDiagonal() * x;
    const double hc1 = n > k ? static_cast<double>(n) / static_cast<double>(n - k) : 1.0;
    Matrix cov = hc1 * xtx_inv * meat * xtx_inv;

    if (options.shanken) {
        const Index offset = options.intercept ? 1 : 0;
        const Vector lam = coef.tail(m);
        const CovarianceFactor omega(fit.factor_cov);
        const double c = omega.quadratic_form(lam);
        cov *= (1.0 + c);
        if (fit.observations > 0) {
            cov.block(offset, offset, m, m) += fit.factor_cov / static_cast<double>(fit.observations);
        }
    }
    cov = 0.5 * (cov + cov.transpose());

    RiskPremiumEstimate est;
    const Index offset = options.intercept ? 1 : 0;
    est.lambda = coef.tail(m);
    est.cov_lambda = cov.block(offset, offset, m, m);
    est.robust_se = est.cov_lambda.diagonal().cwiseMax(0.0).cwiseSqrt();
    est.expected_premium = fit.factor_mean;
    if (options.intercept) {
        est.intercept = coef(0);
        est.intercept_se = std::sqrt(std::max(cov(0, 0), 0.0));
    }
    est.regularized = sigma.regularized();
    est.ridge = sigma.ridge();
    return est;
}

Vector mean_excess(const Eigen::Ref<const Matrix>& excess_returns) {
    return excess_returns.colwise().mean().transpose();
}

Vector expected_premiums(const AlignedPanel& panel) {
    return panel.factors().colwise().mean().transpose();
}

}  // namespace apt
