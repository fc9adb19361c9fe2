#include "apt/rolling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace apt {

namespace {

constexpr double kZ975 = 1.959963984540054;

void run_window(const AlignedPanel& panel, const Window& window, const RollOptions& options,
                const GrsCriticalValues* critical, GrsResult& grs, RiskPremiumEstimate& premium,
                WindowStatus& status) {
    const Index width = window.end - window.start + 1;
    const auto returns = panel.excess_returns().middleRows(window.start, width);
    const auto factors = panel.factors().middleRows(window.start, width);
    try {
        const FirstPassFit fit = first_pass(returns, factors);
        grs = grs_statistic(fit, critical);
        premium = second_pass(fit, mean_excess(returns), options.second_pass);
        status.regularized = grs.regularized || premium.regularized;
        status.low_df = grs.low_df;
    } catch (const std::exception& e) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const Index m = panel.factor_count();
        grs = GrsResult{};
        grs.statistic = nan;
        grs.p_value = nan;
        grs.df1 = static_cast<int>(panel.assets());
        grs.df2 = static_cast<int>(width - panel.assets() - m);
        grs.crit_5pct = critical ? critical->crit_5pct : nan;
        grs.crit_10pct = critical ? critical->crit_10pct : nan;
        premium = RiskPremiumEstimate{};
        premium.lambda = Vector::Constant(m, nan);
        premium.robust_se = Vector::Constant(m, nan);
        premium.cov_lambda = Matrix::Constant(m, m, nan);
        premium.expected_premium = factors.colwise().mean().transpose();
        status.failed = true;
        status.error = e.what();
    }
}

}  // namespace

std::string WindowStatus::flags() const {
    std::string out;
    auto add = [&](const char* f) {
        if (!out.empty()) {
            out += ';';
        }
        out += f;
    };
    if (failed) {
        add("failed");
    }
    if (regularized) {
        add("regularized");
    }
    if (low_df) {
        add("low_df");
    }
    return out.empty() ? "ok" : out;
}

WindowPlan plan_windows(Index observations, Index width, Index step) {
    if (width < 1 || step < 1) {
        throw std::invalid_argument("window width and step must be >= 1");
    }
    if (width > observations) {
        throw std::invalid_argument("window width " + std::to_string(width) + " exceeds sample length " +
                                    std::to_string(observations));
    }
    WindowPlan plan;
    plan.observations = observations;
    plan.width = width;
    plan.step = step;
    const Index count = (observations - width) / step + 1;
    plan.windows.reserve(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) {
        plan.windows.push_back({i * step, i * step + width - 1});
    }
    return plan;
}

std::size_t RollingSeries::flagged() const {
    return static_cast<std::size_t>(std::count_if(status.begin(), status.end(), [](const WindowStatus& s) {
        return s.failed || s.regularized || s.low_df;
    }));
}

std::size_t RollingSeries::failed() const {
    return static_cast<std::size_t>(
        std::count_if(status.begin(), status.end(), [](const WindowStatus& s) { return s.failed; }));
}

Vector RollingSeries::lambda_series(std::string_view factor_id) const {
    auto it = std::find(factor_ids.begin(), factor_ids.end(), factor_id);
    if (it == factor_ids.end()) {
        throw std::invalid_argument("unknown factor '" + std::string(factor_id) + "'");
    }
    const auto j = static_cast<Index>(it - factor_ids.begin());
    Vector out(static_cast<Index>(premiums.size()));
    for (std::size_t w = 0; w < premiums.size(); ++w) {
        out(static_cast<Index>(w)) = premiums[w].lambda(j);
    }
    return out;
}

RollingSeries roll(const AlignedPanel& panel, const WindowPlan& plan, const RollOptions& options) {
    if (plan.observations != panel.observations()) {
        throw std::invalid_argument("window plan built for " + std::to_string(plan.observations) +
                                    " observations, panel has " + std::to_string(panel.observations()));
    }
    const std::size_t count = plan.windows.size();
    RollingSeries out;
    out.windows = plan.windows;
    out.factor_ids = panel.factor_ids();
    out.dates.reserve(count);
    for (const auto& w : plan.windows) {
        out.dates.push_back(panel.dates()[static_cast<std::size_t>(w.end)]);
    }
    out.grs.resize(count);
    out.premiums.resize(count);
    out.status.resize(count);

    // all windows share (n, T - n - m), so the critical values are computed once
    std::optional<GrsCriticalValues> critical;
    const Index df2 = plan.width - panel.assets() - panel.factor_count();
    if (df2 >= 1) {
        critical = grs_critical_values(static_cast<int>(panel.assets()), static_cast<int>(df2));
    }
    const GrsCriticalValues* cv = critical ? &*critical : nullptr;

    auto work = [&](std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; ++i) {
            run_window(panel, plan.windows[i], options, cv, out.grs[i], out.premiums[i], out.status[i]);
        }
    };
    const std::size_t threads =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.threads, 1)), 1, std::max<std::size_t>(count, 1));
    if (threads == 1) {
        work(0, count);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (count + threads - 1) / threads;
        for (std::size_t t = 0; t < threads; ++t) {
            const std::size_t first = t * chunk;
            const std::size_t last = std::min(count, first + chunk);
            if (first < last) {
                pool.emplace_back(work, first, last);
            }
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    const Index m = panel.factor_count();
    out.ci_lower.resize(static_cast<Index>(count), m);
    out.ci_upper.resize(static_cast<Index>(count), m);
    for (std::size_t i = 0; i < count; ++i) {
        const auto& p = out.premiums[i];
        out.ci_lower.row(static_cast<Index>(i)) = (p.lambda - kZ975 * p.robust_se).transpose();
        out.ci_upper.row(static_cast<Index>(i)) = (p.lambda + kZ975 * p.robust_se).transpose();
    }
    return out;
}

double pearson_correlation(const Vector& a, const Vector& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("correlation needs two equal-length series with at least two points");
    }
    const Vector da = a.array() - a.mean();
    const Vector db = b.array() - b.mean();
    const double va = da.squaredNorm();
    const double vb = db.squaredNorm();
    if (!(va > 0.0) || !(vb > 0.0)) {
        throw std::invalid_argument("correlation undefined for a zero-variance series");
    }
    return std::clamp(da.dot(db) / std::sqrt(va * vb), -1.0, 1.0);
}

double premium_correlation(const RollingSeries& series, std::string_view factor_a, std::string_view factor_b) {
    const Vector a = series.lambda_series(factor_a);
    const Vector b = series.lambda_series(factor_b);
    std::vector<double> xa;
    std::vector<double> xb;
    for (Index i = 0; i < a.size(); ++i) {
        if (std::isfinite(a(i)) && std::isfinite(b(i))) {
            xa.push_back(a(i));
            xb.push_back(b(i));
        }
    }
    const auto k = static_cast<Index>(xa.size());
    return pearson_correlation(Eigen::Map<const Vector>(xa.data(), k), Eigen::Map<const Vector>(xb.data(), k));
}

}  // namespace apt
