#include "apt/covariance.hpp"

#include <cmath>
#include <limits>

namespace apt {

CovarianceFactor::CovarianceFactor(const Matrix& covariance, double max_condition) {
    const Index n = covariance.rows();
    if (n == 0 || covariance.cols() != n) {
        throw std::invalid_argument("covariance must be a non-empty square matrix");
    }
    if (!covariance.allFinite()) {
        throw SingularMatrixError("covariance has non-finite entries");
    }
    const Matrix sym = 0.5 * (covariance + covariance.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    auto condition = [&](double ridge) {
        const double a = lo + ridge;
        return a > 0.0 ? (hi + ridge) / a : std::numeric_limits<double>::infinity();
    };

    double ridge = 0.0;
    if (!(condition(0.0) < max_condition)) {
        const double trace = sym.trace();
        const double scale = trace > 0.0 ? trace / static_cast<double>(n) : 1.0;
        if (lo < -1e-8 * std::max(std::fabs(hi), scale)) {
            throw SingularMatrixError("covariance is not positive semidefinite (smallest eigenvalue " +
                                      std::to_string(lo) + ")");
        }
        double delta = kInitialDelta;
        ridge = delta * scale;
        while (!(condition(ridge) < max_condition)) {
            delta *= 10.0;
            if (delta > 1.0) {
                throw SingularMatrixError("covariance could not be regularized");
            }
            ridge = delta * scale;
        }
    }
    condition_ = condition(ridge);
    Matrix work = sym;
    work.diagonal().array() += ridge;
    llt_.compute(work);
    if (llt_.info() != Eigen::Success) {
        throw SingularMatrixError("Cholesky factorization failed");
    }
    ridge_ = ridge;
}

double CovarianceFactor::quadratic_form(const Vector& x) const {
    return whiten(x).squaredNorm();
}

Matrix CovarianceFactor::whiten(const Matrix& x) const {
    return llt_.matrixL().solve(x);
}

Vector CovarianceFactor::whiten(const Vector& x) const {
    return llt_.matrixL().solve(x);
}

Matrix CovarianceFactor::solve(const Matrix& x) const {
    return llt_.solve(x);
}

}  // namespace apt
