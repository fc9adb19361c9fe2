#include "doctest.h"

#include <cmath>
#include <cstring>

#include "apt/rolling.hpp"
#include "apt/simkit.hpp"
#include "test_util.hpp"

using namespace apt;

namespace {

void require_identical(const RollingSeries& a, const RollingSeries& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a.dates[k] == b.dates[k]);
        CHECK(std::memcmp(&a.grs[k].statistic, &b.grs[k].statistic, sizeof(double)) == 0);
        CHECK(a.premiums[k].lambda == b.premiums[k].lambda);
        CHECK(a.premiums[k].robust_se == b.premiums[k].robust_se);
        CHECK(a.status[k].flags() == b.status[k].flags());
    }
}

}  // namespace

TEST_CASE("window plans") {
    CHECK(plan_windows(6300, 500).windows.size() == 5801);
    const auto one = plan_windows(40, 40);
    REQUIRE(one.windows.size() == 1);
    CHECK(one.windows[0].start == 0);
    CHECK(one.windows[0].end == 39);
    const auto stepped = plan_windows(10, 4, 3);
    REQUIRE(stepped.windows.size() == 3);
    CHECK(stepped.windows[0].start == 0);
    CHECK(stepped.windows[1].start == 3);
    CHECK(stepped.windows[2].end == 9);
    CHECK_THROWS(plan_windows(10, 11));
    CHECK_THROWS(plan_windows(10, 4, 0));

    for (Index T = 1; T <= 40; ++T) {
        for (Index w = 1; w <= T; ++w) {
            for (Index step = 1; step <= 5; ++step) {
                const auto plan = plan_windows(T, w, step);
                CHECK(static_cast<Index>(plan.windows.size()) == (T - w) / step + 1);
                for (const auto& win : plan.windows) {
                    CHECK(win.end - win.start + 1 == w);
                    CHECK(win.end < T);
                }
            }
        }
    }
}

TEST_CASE("rolling results equal independent full-window runs, stamped at the last date") {
    const auto panel = simulate(default_spec(8, 2, 300, 5));
    const auto plan = plan_windows(300, 120, 45);
    const auto series = roll(panel, plan);
    REQUIRE(series.size() == plan.windows.size());
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& w = plan.windows[k];
        const auto sub = panel.slice(w.start, w.end - w.start + 1);
        const auto fit = first_pass(sub);
        CHECK(series.dates[k] == panel.dates()[static_cast<std::size_t>(w.end)]);
        CHECK(series.grs[k].statistic == doctest::Approx(grs_statistic(fit).statistic).epsilon(1e-12));
        const auto est = second_pass(fit, mean_excess(sub.excess_returns()));
        CHECK(apt::testing::max_relative_error(series.premiums[k].lambda, est.lambda) < 1e-12);
        CHECK(series.ci_lower(Index(k), 0) == doctest::Approx(est.lambda(0) - 1.959963984540054 * est.robust_se(0)));
        CHECK(series.status[k].flags() == "ok");
    }
}

TEST_CASE("thread count does not change results") {
    const auto panel = simulate(default_spec(10, 3, 400, 6));
    const auto plan = plan_windows(400, 100, 1);
    const auto base = roll(panel, plan, {1, {}});
    for (int threads : {2, 3, 8}) {
        require_identical(base, roll(panel, plan, {threads, {}}));
    }
}

TEST_CASE("locality: data outside a window does not affect it") {
    const auto panel = simulate(default_spec(6, 2, 200, 7));
    Matrix r = panel.excess_returns();
    r.bottomRows(50).array() += 0.5;
    const AlignedPanel changed(panel.dates(), r, panel.asset_ids(), panel.factors(), panel.factor_ids());
    const auto plan = plan_windows(200, 60, 10);
    const auto a = roll(panel, plan);
    const auto b = roll(changed, plan);
    for (std::size_t k = 0; k < plan.windows.size(); ++k) {
        if (plan.windows[k].end < 150) {
            CHECK(a.grs[k].statistic == b.grs[k].statistic);
            CHECK(a.premiums[k].lambda == b.premiums[k].lambda);
        } else {
            CHECK(a.grs[k].statistic != b.grs[k].statistic);
        }
    }
}

TEST_CASE("failed windows are flagged rows, not aborts") {
    auto spec = default_spec(6, 2, 200, 8);
    const auto panel = simulate(spec);
    Matrix f = panel.factors();
    f.block(0, 1, 80, 1).setConstant(0.001);  // collinear with the intercept in early windows
    const AlignedPanel broken(panel.dates(), panel.excess_returns(), panel.asset_ids(), f, panel.factor_ids());
    const auto series = roll(broken, plan_windows(200, 50, 10));
    CHECK(series.failed() > 0);
    CHECK(series.failed() < series.size());
    CHECK(series.status[0].failed);
    CHECK(series.status[0].flags().find("failed") != std::string::npos);
    CHECK(std::isnan(series.grs[0].statistic));
    CHECK(std::isnan(series.premiums[0].lambda(0)));
    CHECK(series.status.back().flags() == "ok");
}

TEST_CASE("small windows raise the low degrees-of-freedom flag") {
    const auto panel = simulate(default_spec(10, 2, 100, 9));
    const auto series = roll(panel, plan_windows(100, 30, 10));
    CHECK(series.flagged() == series.size());
    CHECK(series.status[0].flags() == "low_df");
}

TEST_CASE("premium correlation") {
    const auto panel = simulate(default_spec(10, 3, 300, 10));
    const auto series = roll(panel, plan_windows(300, 100, 5));
    CHECK(premium_correlation(series, "F1", "F1") == doctest::Approx(1.0).epsilon(1e-12));
    const Vector a = series.lambda_series("F2");
    CHECK(pearson_correlation(a, -a) == doctest::Approx(-1.0).epsilon(1e-12));
    const double c = premium_correlation(series, "F1", "F3");
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
    CHECK_THROWS(pearson_correlation(Vector::Ones(5), Vector::LinSpaced(5, 0, 1)));
    CHECK_THROWS(premium_correlation(series, "F1", "nope"));
}

TEST_CASE("constant true premium yields a stable premium path") {
    auto spec = default_spec(12, 2, 3000, 14);
    const auto panel = simulate(spec);
    const auto series = roll(panel, plan_windows(3000, 500, 50));
    for (Index j = 0; j < 2; ++j) {
        const Vector path = series.lambda_series(j == 0 ? "F1" : "F2");
        // window means share the population mean; spread between halves stays within sampling noise
        const Index h = path.size() / 2;
        const double first = path.head(h).mean();
        const double second = path.tail(path.size() - h).mean();
        const double se = std::sqrt(spec.factor_cov(j, j) / 500.0);
        CHECK(std::fabs(first - spec.lambda_true(j)) < 4.0 * se);
        CHECK(std::fabs(second - spec.lambda_true(j)) < 4.0 * se);
    }
}
