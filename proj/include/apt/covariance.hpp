#pragma once

#include "apt/common.hpp"

namespace apt {

/**
 * @brief Cholesky factor of a covariance matrix, ridge-regularized if needed.
 *
 * If the matrix is not positive definite or its condition number reaches
 * `max_condition`, a ridge delta * trace(S)/n * I is added, starting at
 * delta = 1e-8 and growing by decades until the condition number falls
 * below the limit. A zero-trace matrix uses a unit ridge scale.
 *
 * Quadratic forms and whitening go through triangular solves; the inverse
 * is never formed.
 */
class CovarianceFactor {
public:
    static constexpr double kMaxCondition = 1e12;
    static constexpr double kInitialDelta = 1e-8;

    explicit CovarianceFactor(const Matrix& covariance, double max_condition = kMaxCondition);

    /// x' S^{-1} x
    double quadratic_form(const Vector& x) const;

    /// L^{-1} X, so that (L^{-1}X)'(L^{-1}X) = X' S^{-1} X.
    Matrix whiten(const Matrix& x) const;
    Vector whiten(const Vector& x) const;

    /// S^{-1} X via two triangular solves.
    Matrix solve(const Matrix& x) const;

    bool regularized() const { return ridge_ > 0.0; }
    double ridge() const { return ridge_; }
    double condition_number() const { return condition_; }
    Index size() const { return llt_.matrixLLT().rows(); }

private:
    Eigen::LLT<Matrix> llt_;
    double ridge_ = 0.0;
    double condition_ = 0.0;
};

}  // namespace apt
