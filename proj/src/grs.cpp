#include "apt/grs.hpp"

#include <Eigen/Cholesky>
#include <string>

#include "apt/covariance.hpp"
#include "apt/fdist.hpp"

namespace apt {

GrsCriticalValues grs_critical_values(int df1, int df2) {
    return {f_quantile(0.95, df1, df2), f_quantile(0.90, df1, df2)};
}

GrsResult grs_statistic(const FirstPassFit& fit, const GrsCriticalValues* critical) {
    const Index T = fit.observations;
    const Index n = fit.assets();
    const Index m = fit.factor_count();
    const Index df2 = T - n - m;
    if (n < 1 || df2 < 1) {
        throw DataError("GRS: degrees of freedom must be positive (T=" + std::to_string(T) + ", n=" +
                        std::to_string(n) + ", m=" + std::to_string(m) + ")");
    }

    Eigen::LLT<Matrix> omega(fit.factor_cov);
    if (omega.info() != Eigen::Success || omega.matrixLLT().diagonal().minCoeff() <= 0.0) {
        throw SingularMatrixError("GRS: factor covariance is singular");
    }
    const Vector whitened_mean = omega.matrixL().solve(fit.factor_mean);
    const double sharpe_sq = whitened_mean.squaredNorm();

    const CovarianceFactor sigma(fit.sigma_hat);
    const double alpha_form = sigma.quadratic_form(fit.alpha);

    const double Td = static_cast<double>(T);
    const double nd = static_cast<double>(n);
    const double md = static_cast<double>(m);
    const double scale = Td * (Td - nd - md) / (nd * (Td - md - 1.0));

    GrsResult out;
    out.statistic = scale * alpha_form / (1.0 + sharpe_sq);
    out.df1 = static_cast<int>(n);
    out.df2 = static_cast<int>(df2);
    out.p_value = f_upper_tail(out.statistic, out.df1, out.df2);
    const GrsCriticalValues cv = critical ? *critical : grs_critical_values(out.df1, out.df2);
    out.crit_5pct = cv.crit_5pct;
    out.crit_10pct = cv.crit_10pct;
    out.regularized = sigma.regularized();
    out.low_df = df2 < kLowDfThreshold;
    return out;
}

}  // namespace apt
