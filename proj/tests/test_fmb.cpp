#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "apt/fmb.hpp"
#include "apt/simkit.hpp"
#include "test_util.hpp"

using namespace apt;
using apt::testing::max_relative_error;
using apt::testing::random_matrix;
using apt::testing::random_spd;

namespace {

Matrix with_intercept(const Matrix& f) {
    Matrix x(f.rows(), f.cols() + 1);
    x.col(0).setOnes();
    x.rightCols(f.cols()) = f;
    return x;
}

/// W kron I_T as a dense matrix.
Matrix kron_identity(const Matrix& w, Index t) {
    Matrix out = Matrix::Zero(w.rows() * t, w.cols() * t);
    for (Index i = 0; i < w.rows(); ++i) {
        for (Index j = 0; j < w.cols(); ++j) {
            out.block(i * t, j * t, t, t).diagonal().setConstant(w(i, j));
        }
    }
    return out;
}

/// Stacked seemingly-unrelated regression solved by GLS with weight W kron I_T.
Matrix sur_gls(const Matrix& returns, const Matrix& factors, const Matrix& weight) {
    const Index T = returns.rows();
    const Index n = returns.cols();
    const Matrix x = with_intercept(factors);
    const Index k = x.cols();
    Matrix big_x = Matrix::Zero(T * n, k * n);
    Vector y(T * n);
    for (Index i = 0; i < n; ++i) {
        big_x.block(i * T, i * k, T, k) = x;
        y.segment(i * T, T) = returns.col(i);
    }
    const Matrix w_inv = kron_identity(weight.inverse(), T);
    const Matrix lhs = big_x.transpose() * w_inv * big_x;
    const Vector coef = lhs.inverse() * (big_x.transpose() * w_inv * y);
    Matrix out(k, n);
    for (Index i = 0; i < n; ++i) {
        out.col(i) = coef.segment(i * k, k);
    }
    return out;
}

FirstPassFit fit_from(const Matrix& beta, const Matrix& sigma, Index observations = 1000) {
    FirstPassFit fit;
    fit.beta = beta;
    fit.alpha = Vector::Zero(beta.rows());
    fit.sigma_hat = sigma;
    fit.factor_mean = Vector::Zero(beta.cols());
    fit.factor_cov = Matrix::Identity(beta.cols(), beta.cols());
    fit.observations = observations;
    return fit;
}

Vector gls_by_inverse(const Matrix& b, const Matrix& s, const Vector& mu) {
    const Matrix s_inv = s.inverse();
    return (b.transpose() * s_inv * b).inverse() * (b.transpose() * s_inv * mu);
}

}  // namespace

TEST_CASE("noiseless first pass recovers the generators") {
    std::mt19937_64 rng(21);
    const Index T = 200, n = 6, m = 3;
    const Matrix f = random_matrix(rng, T, m, 0.01);
    const Matrix beta = random_matrix(rng, n, m);
    const Vector alpha = random_matrix(rng, n, 1, 0.001).col(0);
    const Matrix r = (f * beta.transpose()).rowwise() + alpha.transpose();
    const auto fit = first_pass(r, f);
    CHECK(max_relative_error(fit.beta, beta) < 1e-10);
    CHECK(max_relative_error(fit.alpha, alpha) < 1e-10);
    CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("single asset equal to the single factor") {
    std::mt19937_64 rng(2);
    const Matrix f = random_matrix(rng, 50, 1);
    const auto fit = first_pass(f, f);
    CHECK(fit.beta(0, 0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::fabs(fit.alpha(0)) < 1e-14);
}

TEST_CASE("first pass divisors and residual orthogonality") {
    std::mt19937_64 rng(4);
    const Index T = 120, n = 5, m = 2;
    const Matrix f = random_matrix(rng, T, m, 0.01);
    const Matrix r = f * random_matrix(rng, n, m).transpose() + random_matrix(rng, T, n, 0.02);
    const auto fit = first_pass(r, f);

    const Matrix x = with_intercept(f);
    const Matrix coef = (x.transpose() * x).inverse() * x.transpose() * r;
    CHECK(max_relative_error(fit.alpha, coef.row(0).transpose()) < 1e-10);
    CHECK(max_relative_error(fit.beta, coef.bottomRows(m).transpose()) < 1e-10);

    const Matrix e = r - x * coef;
    CHECK(max_relative_error(fit.sigma_hat, e.transpose() * e / double(T - m - 1)) < 1e-10);
    const Vector fbar = f.colwise().mean().transpose();
    const Matrix fc = f.rowwise() - fbar.transpose();
    CHECK(max_relative_error(fit.factor_mean, fbar) < 1e-12);
    CHECK(max_relative_error(fit.factor_cov, fc.transpose() * fc / double(T)) < 1e-12);

    CHECK((fit.residuals.colwise().sum()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((f.transpose() * fit.residuals).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((fit.sigma_hat - fit.sigma_hat.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(fit.sigma_hat).eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("equation-by-equation OLS equals joint GLS for any SPD weight") {
    std::mt19937_64 rng(8);
    const Index T = 40, n = 4, m = 2;
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix f = random_matrix(rng, T, m);
        const Matrix r = f * random_matrix(rng, n, m).transpose() + random_matrix(rng, T, n);
        const auto fit = first_pass(r, f);
        const Matrix coef = sur_gls(r, f, random_spd(rng, n, 0.1, 10.0));
        CHECK(max_relative_error(fit.alpha, coef.row(0).transpose()) < 1e-8);
        CHECK(max_relative_error(fit.beta, coef.bottomRows(m).transpose()) < 1e-8);
    }
}

TEST_CASE("first pass preconditions") {
    std::mt19937_64 rng(1);
    const Matrix f = random_matrix(rng, 10, 2);
    CHECK_THROWS_AS(first_pass(random_matrix(rng, 10, 7), f), DataError);  // T <= n + m + 1
    Matrix collinear = random_matrix(rng, 30, 2);
    collinear.col(1) = 2.0 * collinear.col(0);
    CHECK_THROWS_AS(first_pass(random_matrix(rng, 30, 3), collinear), SingularMatrixError);
    CHECK_THROWS_AS(first_pass(random_matrix(rng, 30, 3), Matrix::Constant(30, 1, 1.0)), SingularMatrixError);
    CHECK_THROWS_AS(first_pass(random_matrix(rng, 30, 3), random_matrix(rng, 29, 1)), DataError);
}

TEST_CASE("loadings are within four standard errors in at least 99% of replications") {
    const int reps = 500;
    auto spec = default_spec(33, 9, 500, 777);
    long inside = 0, total = 0;
    for (int rep = 0; rep < reps; ++rep) {
        spec.seed = replication_seed(777, static_cast<std::uint64_t>(rep));
        const auto panel = simulate(spec);
        const auto fit = first_pass(panel);
        const Matrix x = with_intercept(panel.factors());
        const Vector diag = (x.transpose() * x).inverse().diagonal();
        for (Index i = 0; i < spec.n; ++i) {
            for (Index j = 0; j < spec.m; ++j) {
                const double se = std::sqrt(fit.sigma_hat(i, i) * diag(j + 1));
                inside += std::fabs(fit.beta(i, j) - spec.beta(i, j)) < 4.0 * se;
                ++total;
            }
        }
    }
    CHECK(double(inside) / double(total) >= 0.99);
}

TEST_CASE("second pass identity and scalar-weight cases") {
    const Vector mu = (Vector(3) << 0.01, -0.02, 0.005).finished();
    const auto est = second_pass(fit_from(Matrix::Identity(3, 3), Matrix::Identity(3, 3)), mu);
    CHECK(max_relative_error(est.lambda, mu) < 1e-14);
    CHECK_FALSE(est.regularized);

    std::mt19937_64 rng(3);
    const Matrix b = random_matrix(rng, 12, 3);
    const Vector y = random_matrix(rng, 12, 1).col(0);
    const Vector ols = (b.transpose() * b).ldlt().solve(b.transpose() * y);
    for (double c : {1e-6, 1.0, 250.0}) {
        const auto e = second_pass(fit_from(b, c * Matrix::Identity(12, 12)), y);
        CHECK(max_relative_error(e.lambda, ols) < 1e-12);
    }
}

TEST_CASE("second pass matches an explicit-inverse GLS oracle") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 25; ++trial) {
        const Index n = 8 + trial % 20, m = 1 + trial % 6;
        const Matrix b = random_matrix(rng, n, m);
        const Matrix s = random_spd(rng, n, 0.05, 3.0);
        const Vector mu = random_matrix(rng, n, 1, 0.01).col(0);
        const auto est = second_pass(fit_from(b, s), mu);
        CHECK(max_relative_error(est.lambda, gls_by_inverse(b, s, mu)) < 1e-10);

        // HC1 covariance of the Cholesky-whitened regression
        const Matrix l_inv = Eigen::LLT<Matrix>(s).matrixL().toDenseMatrix().inverse();
        const Matrix x = l_inv * b;
        const Vector e = l_inv * mu - x * est.lambda;
        const Matrix bread = (x.transpose() * x).inverse();
        Matrix meat = Matrix::Zero(m, m);
        for (Index i = 0; i < n; ++i) {
            meat += e(i) * e(i) * x.row(i).transpose() * x.row(i);
        }
        const Matrix cov = double(n) / double(n - m) * bread * meat * bread;
        CHECK(max_relative_error(est.cov_lambda, cov) < 1e-8);
        CHECK((est.robust_se.array() > 0.0).all());
    }
}

TEST_CASE("second pass recovers premiums exactly when mean returns are spanned") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix b = random_matrix(rng, 20, 4);
        const Vector lambda = random_matrix(rng, 4, 1, 0.001).col(0);
        const auto est = second_pass(fit_from(b, random_spd(rng, 20, 0.01, 5.0)), b * lambda);
        CHECK(max_relative_error(est.lambda, lambda) < 1e-10);
    }
}

TEST_CASE("second pass options") {
    std::mt19937_64 rng(12);
    const Matrix b = random_matrix(rng, 15, 2);
    const Matrix s = random_spd(rng, 15);
    const Vector mu = random_matrix(rng, 15, 1, 0.01).col(0);
    auto fit = fit_from(b, s, 500);
    fit.factor_cov = random_spd(rng, 2, 1e-5, 1e-4);
    const auto plain = second_pass(fit, mu);
    const auto sh = second_pass(fit, mu, {true, false});
    CHECK(max_relative_error(sh.lambda, plain.lambda) < 1e-14);
    const double c = plain.lambda.dot(fit.factor_cov.inverse() * plain.lambda);
    CHECK(max_relative_error(sh.cov_lambda, (1.0 + c) * plain.cov_lambda + fit.factor_cov / 500.0) < 1e-10);

    const auto ic = second_pass(fit, mu, {false, true});
    REQUIRE(ic.intercept.has_value());
    Matrix bx(15, 3);
    bx.col(0).setOnes();
    bx.rightCols(2) = b;
    const Vector coef = gls_by_inverse(bx, s, mu);
    CHECK(*ic.intercept == doctest::Approx(coef(0)).epsilon(1e-9));
    CHECK(max_relative_error(ic.lambda, coef.tail(2)) < 1e-9);

    Matrix rank_def = b;
    rank_def.col(1) = rank_def.col(0);
    CHECK_THROWS_AS(second_pass(fit_from(rank_def, s), mu), SingularMatrixError);
    CHECK_THROWS_AS(second_pass(fit_from(b, s), Vector::Zero(3)), DataError);
}

TEST_CASE("a singular residual covariance is ridge-regularized and flagged") {
    std::mt19937_64 rng(13);
    const Matrix b = random_matrix(rng, 10, 2);
    const Matrix v = random_matrix(rng, 10, 3);
    const auto est = second_pass(fit_from(b, v * v.transpose()), b * Vector::Constant(2, 0.01));
    CHECK(est.regularized);
    CHECK(est.ridge > 0.0);
    CHECK(est.lambda.allFinite());
}

TEST_CASE("scale behaviour of the two passes") {
    auto spec = default_spec(12, 3, 400, 31);
    const auto panel = simulate(spec);
    const auto base_fit = first_pass(panel);
    const auto base = second_pass(base_fit, mean_excess(panel.excess_returns()));
    for (double c : {0.01, 7.5}) {
        SUBCASE("returns and factors rescaled together") {
            const auto fit = first_pass(c * panel.excess_returns(), c * panel.factors());
            const auto est = second_pass(fit, mean_excess(c * panel.excess_returns()));
            CHECK(max_relative_error(fit.alpha, c * base_fit.alpha) < 1e-10);
            CHECK(max_relative_error(fit.beta, base_fit.beta) < 1e-10);
            CHECK(max_relative_error(est.lambda, c * base.lambda) < 1e-9);
            CHECK(max_relative_error(est.robust_se, c * base.robust_se) < 1e-9);
        }
        SUBCASE("returns alone rescaled") {
            const auto fit = first_pass(c * panel.excess_returns(), panel.factors());
            const auto est = second_pass(fit, mean_excess(c * panel.excess_returns()));
            CHECK(max_relative_error(fit.alpha, c * base_fit.alpha) < 1e-10);
            CHECK(max_relative_error(fit.beta, c * base_fit.beta) < 1e-10);
            CHECK(max_relative_error(est.lambda, base.lambda) < 1e-9);
            CHECK(max_relative_error(est.robust_se, base.robust_se) < 1e-9);
        }
    }
}

TEST_CASE("expected premiums are factor means") {
    const auto dates = apt::testing::consecutive_days(apt::testing::ymd(2020, 1, 1), 4);
    Matrix f(4, 2);
    f << 0.5, 1.0, 0.5, -1.0, 0.5, 1.0, 0.5, -1.0;
    const AlignedPanel panel(dates, Matrix::Zero(4, 3), {"a", "b", "c"}, f, {"c1", "z"});
    const Vector e = expected_premiums(panel);
    CHECK(e(0) == 0.5);
    CHECK(e(1) == 0.0);
}
