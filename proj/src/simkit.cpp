#include "apt/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "apt/grs.hpp"

namespace apt {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Factor S with S S' = cov for a positive semidefinite cov.
Matrix psd_root(const Matrix& cov, const char* what) {
    const Matrix sym = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success) {
        throw std::invalid_argument(std::string(what) + ": eigen decomposition failed");
    }
    const Vector values = eig.eigenvalues();
    const double scale = std::max(values.cwiseAbs().maxCoeff(), 1e-300);
    if (values.minCoeff() < -1e-10 * scale) {
        throw std::invalid_argument(std::string(what) + " is not positive semidefinite");
    }
    return eig.eigenvectors() * values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

class Innovations {
public:
    Innovations(std::uint64_t seed, Innovation kind, double df) : engine_(seed), kind_(kind), df_(df) {
        if (kind_ == Innovation::student_t) {
            chi_ = std::chi_squared_distribution<double>(df_);
            scale_ = std::sqrt((df_ - 2.0) / df_);
        }
    }

    double draw() {
        const double z = normal_(engine_);
        if (kind_ == Innovation::gaussian) {
            return z;
        }
        return z / std::sqrt(chi_(engine_) / df_) * scale_;
    }

private:
    std::mt19937_64 engine_;
    Innovation kind_;
    double df_;
    double scale_ = 1.0;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::chi_squared_distribution<double> chi_{1.0};
};

std::vector<Date> weekday_calendar(int count) {
    using namespace std::chrono;
    std::vector<Date> out;
    out.reserve(static_cast<std::size_t>(count));
    sys_days day = sys_days(year{2000} / January / 3);  // a Monday
    while (static_cast<int>(out.size()) < count) {
        const weekday wd{day};
        if (wd != Saturday && wd != Sunday) {
            out.emplace_back(day);
        }
        day += days{1};
    }
    return out;
}

}  // namespace

void DgpSpec::validate() const {
    if (m < 1 || n <= m) {
        throw std::invalid_argument("DGP: need 1 <= m < n");
    }
    if (T < 2) {
        throw std::invalid_argument("DGP: T must be at least 2");
    }
    if (alpha.size() != n || beta.rows() != n || beta.cols() != m || lambda_true.size() != m ||
        factor_cov.rows() != m || factor_cov.cols() != m || resid_cov.rows() != n || resid_cov.cols() != n) {
        throw std::invalid_argument("DGP: parameter dimensions do not match n and m");
    }
    if (innovations == Innovation::student_t && !(t_df > 2.0)) {
        throw std::invalid_argument("DGP: Student-t degrees of freedom must exceed 2");
    }
}

DgpSpec default_spec(int n, int m, int T, std::uint64_t seed) {
    DgpSpec spec;
    spec.n = n;
    spec.m = m;
    spec.T = T;
    spec.seed = seed;
    std::mt19937_64 engine(splitmix64(seed ^ 0x5EEDBEEFULL));
    std::uniform_real_distribution<double> market_beta(0.5, 1.5);
    std::normal_distribution<double> other_beta(0.0, 0.5);
    std::uniform_real_distribution<double> premium(0.0002, 0.0005);
    spec.beta.resize(n, m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            spec.beta(i, j) = j == 0 ? market_beta(engine) : other_beta(engine);
        }
    }
    spec.lambda_true.resize(m);
    for (int j = 0; j < m; ++j) {
        spec.lambda_true(j) = premium(engine);
    }
    spec.alpha = Vector::Zero(n);
    spec.factor_cov = Matrix::Identity(m, m) * (0.01 * 0.01);
    spec.resid_cov = Matrix::Identity(n, n) * (0.015 * 0.015);
    return spec;
}

AlignedPanel simulate(const DgpSpec& spec) {
    spec.validate();
    const Matrix factor_root = psd_root(spec.factor_cov, "factor covariance");
    const Matrix resid_root = psd_root(spec.resid_cov, "residual covariance");
    Innovations draws(spec.seed, spec.innovations, spec.t_df);

    // draw order per period: m factor shocks, then n residual shocks
    Matrix z_f(spec.T, spec.m);
    Matrix z_e(spec.T, spec.n);
    for (int t = 0; t < spec.T; ++t) {
        for (int j = 0; j < spec.m; ++j) {
            z_f(t, j) = draws.draw();
        }
        for (int i = 0; i < spec.n; ++i) {
            z_e(t, i) = draws.draw();
        }
    }
    Matrix factors = z_f * factor_root.transpose();
    factors.rowwise() += spec.lambda_true.transpose();
    Matrix returns = factors * spec.beta.transpose() + z_e * resid_root.transpose();
    returns.rowwise() += spec.alpha.transpose();
    std::vector<std::string> asset_ids;
    std::vector<std::string> factor_ids;
    for (int i = 0; i < spec.n; ++i) {
        asset_ids.push_back("A" + std::to_string(i + 1));
    }
    for (int j = 0; j < spec.m; ++j) {
        factor_ids.push_back("F" + std::to_string(j + 1));
    }
    return AlignedPanel(weekday_calendar(spec.T), std::move(returns), std::move(asset_ids), std::move(factors),
                        std::move(factor_ids));
}

std::uint64_t replication_seed(std::uint64_t base_seed, std::uint64_t rep) {
    return splitmix64(splitmix64(base_seed) ^ splitmix64(rep + 0x632BE59BD9B4E019ULL));
}

McReport mc_experiment(const DgpSpec& spec, int reps, double test_level, const McOptions& options) {
    spec.validate();
    if (reps < 1) {
        throw std::invalid_argument("Monte Carlo: reps must be >= 1");
    }
    if (!(test_level > 0.0 && test_level < 1.0)) {
        throw std::invalid_argument("Monte Carlo: test level must lie in (0, 1)");
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    struct Rep {
        bool ok = false;
        bool reject = false;
        double grs = 0.0;
        Vector lambda;
        Vector alpha;
        Matrix beta;
    };
    std::vector<Rep> results(static_cast<std::size_t>(reps));

    auto run = [&](std::size_t r) {
        DgpSpec local = spec;
        local.seed = replication_seed(spec.seed, r);
        Rep& out = results[r];
        try {
            const AlignedPanel panel = simulate(local);
            const FirstPassFit fit = first_pass(panel);
            const GrsResult grs = grs_statistic(fit);
            const RiskPremiumEstimate est = second_pass(fit, mean_excess(panel.excess_returns()), options.second_pass);
            out.grs = grs.statistic;
            out.reject = grs.p_value < test_level;
            out.lambda = est.lambda;
            out.alpha = fit.alpha;
            out.beta = fit.beta;
            out.ok = true;
        } catch (const std::exception&) {
            out.ok = false;
            out.grs = nan;
        }
    };
    const int threads = std::clamp(options.threads, 1, reps);
    if (threads == 1) {
        for (std::size_t r = 0; r < results.size(); ++r) {
            run(r);
        }
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t r = static_cast<std::size_t>(t); r < results.size(); r += threads) {
                    run(r);
                }
            });
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    McReport report;
    report.reps = reps;
    report.test_level = test_level;
    int ok = 0;
    int rejections = 0;
    Vector lambda_sum = Vector::Zero(spec.m);
    Vector lambda_sq = Vector::Zero(spec.m);
    Vector alpha_sum = Vector::Zero(spec.n);
    Vector alpha_sq = Vector::Zero(spec.n);
    Matrix beta_err_sum = Matrix::Zero(spec.n, spec.m);
    double beta_sq = 0.0;
    for (const auto& r : results) {
        report.grs_statistics.push_back(r.grs);
        if (!r.ok) {
            continue;
        }
        ++ok;
        rejections += r.reject;
        const Vector dl = r.lambda - spec.lambda_true;
        lambda_sum += dl;
        lambda_sq += dl.array().square().matrix();
        alpha_sum += r.alpha;
        alpha_sq += r.alpha.array().square().matrix();
        const Matrix db = r.beta - spec.beta;
        beta_err_sum += db;
        beta_sq += db.squaredNorm();
    }
    report.failures = reps - ok;
    if (ok == 0) {
        report.rejection_rate = nan;
        report.rejection_mc_se = nan;
        report.beta_mean_abs_bias = nan;
        report.beta_rmse = nan;
        report.alpha_hat_sd = Vector::Constant(spec.n, nan);
        for (int j = 0; j < spec.m; ++j) {
            report.lambda.push_back({"F" + std::to_string(j + 1), spec.lambda_true(j), nan, nan, nan, nan});
        }
        return report;
    }
    const double k = static_cast<double>(ok);
    report.rejection_rate = rejections / k;
    report.rejection_mc_se = std::sqrt(report.rejection_rate * (1.0 - report.rejection_rate) / k);
    for (int j = 0; j < spec.m; ++j) {
        EstimatorStats s;
        s.id = "F" + std::to_string(j + 1);
        s.truth = spec.lambda_true(j);
        s.bias = lambda_sum(j) / k;
        s.mean = s.truth + s.bias;
        s.rmse = std::sqrt(lambda_sq(j) / k);
        s.mc_se = ok > 1 ? std::sqrt(std::max(lambda_sq(j) / k - s.bias * s.bias, 0.0) * k / (k - 1.0) / k) : nan;
        report.lambda.push_back(s);
    }
    report.beta_mean_abs_bias = (beta_err_sum / k).cwiseAbs().mean();
    report.beta_rmse = std::sqrt(beta_sq / (k * spec.n * spec.m));
    report.alpha_hat_sd.resize(spec.n);
    for (int i = 0; i < spec.n; ++i) {
        const double mean = alpha_sum(i) / k;
        report.alpha_hat_sd(i) =
            ok > 1 ? std::sqrt(std::max(alpha_sq(i) / k - mean * mean, 0.0) * k / (k - 1.0)) : nan;
    }
    return report;
}

Innovation parse_innovation(std::string_view text) {
    if (text == "gaussian" || text == "normal") {
        return Innovation::gaussian;
    }
    if (text == "student_t" || text == "t") {
        return Innovation::student_t;
    }
    throw std::invalid_argument("unknown innovation distribution '" + std::string(text) + "'");
}

}  // namespace apt
