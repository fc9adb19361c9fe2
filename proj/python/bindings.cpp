#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "apt/fdist.hpp"
#include "apt/fmb.hpp"
#include "apt/grs.hpp"
#include "apt/rolling.hpp"
#include "apt/simkit.hpp"
#include "apt/stationarity.hpp"

namespace py = pybind11;
using namespace apt;

namespace {

std::vector<std::string> iso_dates(const std::vector<Date>& dates) {
    std::vector<std::string> out;
    out.reserve(dates.size());
    for (const auto& d : dates) {
        out.push_back(format_date(d));
    }
    return out;
}

AlignedPanel make_panel(const std::vector<std::string>& dates, const Matrix& returns,
                        const std::vector<std::string>& asset_ids, const Matrix& factors,
                        const std::vector<std::string>& factor_ids) {
    std::vector<Date> parsed(dates.size());
    for (std::size_t i = 0; i < dates.size(); ++i) {
        if (!parse_date(dates[i], parsed[i])) {
            throw DataError("unparseable date '" + dates[i] + "'");
        }
    }
    return AlignedPanel(std::move(parsed), returns, asset_ids, factors, factor_ids);
}

py::dict rolling_dict(const RollingSeries& s) {
    const Index k = static_cast<Index>(s.size());
    const Index m = static_cast<Index>(s.factor_ids.size());
    Vector grs(k), p(k), crit5(k), crit10(k);
    Matrix lambda(k, m), se(k, m);
    std::vector<std::string> flags;
    for (Index i = 0; i < k; ++i) {
        const auto w = static_cast<std::size_t>(i);
        grs(i) = s.grs[w].statistic;
        p(i) = s.grs[w].p_value;
        crit5(i) = s.grs[w].crit_5pct;
        crit10(i) = s.grs[w].crit_10pct;
        lambda.row(i) = s.premiums[w].lambda.transpose();
        se.row(i) = s.premiums[w].robust_se.transpose();
        flags.push_back(s.status[w].flags());
    }
    py::dict d;
    d["dates"] = iso_dates(s.dates);
    d["factor_ids"] = s.factor_ids;
    d["grs"] = grs;
    d["p_value"] = p;
    d["crit_5pct"] = crit5;
    d["crit_10pct"] = crit10;
    d["lambda"] = lambda;
    d["robust_se"] = se;
    d["ci_lower"] = s.ci_lower;
    d["ci_upper"] = s.ci_upper;
    d["flags"] = flags;
    return d;
}

}  // namespace

PYBIND11_MODULE(_aptroll, m) {
    m.doc() = "Rolling two-pass factor model estimation and generalized GRS testing";

    auto base = py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<SingularMatrixError>(m, "SingularMatrixError", base.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    py::class_<AlignedPanel>(m, "Panel")
        .def(py::init(&make_panel), py::arg("dates"), py::arg("excess_returns"), py::arg("asset_ids"),
             py::arg("factors"), py::arg("factor_ids"))
        .def_property_readonly("dates", [](const AlignedPanel& p) { return iso_dates(p.dates()); })
        .def_property_readonly("excess_returns", &AlignedPanel::excess_returns)
        .def_property_readonly("factors", &AlignedPanel::factors)
        .def_property_readonly("asset_ids", &AlignedPanel::asset_ids)
        .def_property_readonly("factor_ids", &AlignedPanel::factor_ids)
        .def_property_readonly("observations", &AlignedPanel::observations);

    py::class_<FirstPassFit>(m, "FirstPassFit")
        .def_readonly("alpha", &FirstPassFit::alpha)
        .def_readonly("beta", &FirstPassFit::beta)
        .def_readonly("residuals", &FirstPassFit::residuals)
        .def_readonly("sigma_hat", &FirstPassFit::sigma_hat)
        .def_readonly("factor_mean", &FirstPassFit::factor_mean)
        .def_readonly("factor_cov", &FirstPassFit::factor_cov)
        .def_readonly("observations", &FirstPassFit::observations);

    py::class_<RiskPremiumEstimate>(m, "RiskPremiumEstimate")
        .def_readonly("lambda_", &RiskPremiumEstimate::lambda)
        .def_readonly("robust_se", &RiskPremiumEstimate::robust_se)
        .def_readonly("cov_lambda", &RiskPremiumEstimate::cov_lambda)
        .def_readonly("expected_premium", &RiskPremiumEstimate::expected_premium)
        .def_readonly("intercept", &RiskPremiumEstimate::intercept)
        .def_readonly("intercept_se", &RiskPremiumEstimate::intercept_se)
        .def_readonly("regularized", &RiskPremiumEstimate::regularized);

    py::class_<GrsResult>(m, "GrsResult")
        .def_readonly("statistic", &GrsResult::statistic)
        .def_readonly("df1", &GrsResult::df1)
        .def_readonly("df2", &GrsResult::df2)
        .def_readonly("p_value", &GrsResult::p_value)
        .def_readonly("crit_5pct", &GrsResult::crit_5pct)
        .def_readonly("crit_10pct", &GrsResult::crit_10pct)
        .def_readonly("regularized", &GrsResult::regularized)
        .def_readonly("low_df", &GrsResult::low_df);

    py::class_<AdfResult>(m, "AdfResult")
        .def_readonly("statistic", &AdfResult::statistic)
        .def_readonly("chosen_lag", &AdfResult::chosen_lag)
        .def_readonly("critical_values", &AdfResult::critical_values)
        .def_readonly("reject_at_1pct", &AdfResult::reject_at_1pct)
        .def_readonly("reject_at_5pct", &AdfResult::reject_at_5pct)
        .def_readonly("reject_at_10pct", &AdfResult::reject_at_10pct)
        .def_readonly("observations", &AdfResult::observations)
        .def_property_readonly("p_value_band", [](const AdfResult& r) { return std::string(to_string(r.p_value_band)); });

    m.def("first_pass", py::overload_cast<const Eigen::Ref<const Matrix>&, const Eigen::Ref<const Matrix>&>(&first_pass),
          py::arg("excess_returns"), py::arg("factors"));
    m.def(
        "second_pass",
        [](const FirstPassFit& fit, const Vector& mean_excess, bool shanken, bool intercept) {
            return second_pass(fit, mean_excess, {shanken, intercept});
        },
        py::arg("fit"), py::arg("mean_excess"), py::arg("shanken") = false, py::arg("intercept") = false);
    m.def("grs_statistic", [](const FirstPassFit& fit) { return grs_statistic(fit); }, py::arg("fit"));
    m.def("f_upper_tail", &f_upper_tail, py::arg("x"), py::arg("df1"), py::arg("df2"));
    m.def("f_quantile", &f_quantile, py::arg("p"), py::arg("df1"), py::arg("df2"));
    m.def(
        "adf_test",
        [](const std::vector<double>& series, std::optional<int> max_lag, const std::string& deterministic) {
            return adf_test(series, max_lag, parse_deterministic(deterministic));
        },
        py::arg("series"), py::arg("max_lag") = py::none(), py::arg("deterministic") = "constant");
    m.def(
        "roll",
        [](const AlignedPanel& panel, Index window, Index step, int threads, bool shanken) {
            py::gil_scoped_release release;
            auto series = roll(panel, plan_windows(panel.observations(), window, step), {threads, {shanken, false}});
            py::gil_scoped_acquire acquire;
            return rolling_dict(series);
        },
        py::arg("panel"), py::arg("window"), py::arg("step") = 1, py::arg("threads") = 1, py::arg("shanken") = false);
    m.def(
        "simulate",
        [](int n, int factors, int T, std::uint64_t seed, std::optional<Vector> alpha, double resid_sd) {
            auto spec = default_spec(n, factors, T, seed);
            if (alpha) {
                spec.alpha = *alpha;
            }
            spec.resid_cov = resid_sd * resid_sd * Matrix::Identity(n, n);
            return simulate(spec);
        },
        py::arg("n") = 33, py::arg("m") = 9, py::arg("T") = 6300, py::arg("seed") = 20240101,
        py::arg("alpha") = py::none(), py::arg("resid_sd") = 0.015);
    m.def(
        "mc_experiment",
        [](int n, int factors, int T, int reps, double level, std::uint64_t seed, int threads) {
            McReport r;
            {
                py::gil_scoped_release release;
                r = mc_experiment(default_spec(n, factors, T, seed), reps, level, {threads, {}});
            }
            py::dict d;
            d["reps"] = r.reps;
            d["failures"] = r.failures;
            d["rejection_rate"] = r.rejection_rate;
            d["rejection_mc_se"] = r.rejection_mc_se;
            std::vector<double> bias, mc_se, rmse;
            for (const auto& s : r.lambda) {
                bias.push_back(s.bias);
                mc_se.push_back(s.mc_se);
                rmse.push_back(s.rmse);
            }
            d["lambda_bias"] = bias;
            d["lambda_mc_se"] = mc_se;
            d["lambda_rmse"] = rmse;
            d["beta_rmse"] = r.beta_rmse;
            d["grs_statistics"] = r.grs_statistics;
            return d;
        },
        py::arg("n"), py::arg("m"), py::arg("T"), py::arg("reps"), py::arg("level") = 0.05,
        py::arg("seed") = 20240101, py::arg("threads") = 1);
}
