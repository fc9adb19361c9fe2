#include "apt/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "apt/csv.hpp"
#include "apt/factors.hpp"

namespace apt {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kPanelFile = "panel.csv";
constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kReportFile = "alignment_report.csv";

char delimiter_of(const Config& config) {
    const std::string d = config.get_string("delimiter");
    if (d == "\\t" || d == "tab") {
        return '\t';
    }
    if (d.size() != 1) {
        throw DataError("delimiter must be a single character, got '" + d + "'");
    }
    return d[0];
}

fs::path require_file(const Config& config, const std::string& key) {
    const fs::path p = config.resolve_path(key);
    if (!fs::exists(p)) {
        throw DataError(key + ": file not found: " + p.string());
    }
    return p;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    return out;
}

fs::path output_dir(const Config& config) {
    fs::path dir(config.get_string("out"));
    fs::create_directories(dir);
    return dir;
}

std::string fmt(double v) {
    return std::isfinite(v) ? format_double(v) : std::string("nan");
}

}  // namespace

std::string file_fnv1a64(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open file " + path.string());
    }
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 14];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

IngestResult ingest(const Config& config) {
    const char delim = delimiter_of(config);
    std::vector<InputFile> inputs;

    const fs::path asset_path = require_file(config, "assets.path");
    inputs.push_back({asset_path, file_fnv1a64(asset_path)});
    CsvSchema asset_schema{config.get_string("assets.date_column"), config.get_list("assets.columns"), delim};
    const auto asset_raw = load_csv(asset_path, asset_schema);

    const std::string asset_kind = config.get_string("assets.kind");
    if (asset_kind != "levels" && asset_kind != "returns" && asset_kind != "excess") {
        throw DataError("assets.kind must be levels, returns or excess, got '" + asset_kind + "'");
    }
    FactorContext context;
    context.return_kind = parse_return_kind(config.get_string("return_kind"));
    context.rate_divisor = config.get_double("risk_free.divisor");
    context.rate_scale = config.get_double("risk_free.scale");

    std::map<std::string, RawSeries> series_by_name;
    if (config.has("series.path")) {
        const fs::path series_path = require_file(config, "series.path");
        inputs.push_back({series_path, file_fnv1a64(series_path)});
        CsvSchema schema{config.get_string("series.date_column"), {}, delim};
        for (auto& s : load_csv(series_path, schema)) {
            series_by_name.emplace(s.id(), std::move(s));
        }
    }

    std::vector<RawSeries> factor_series;
    for (const auto& [id, text] : config.factor_entries()) {
        factor_series.push_back(build_factor(parse_factor_spec(id, text), series_by_name, context));
    }
    if (config.has("factors.path")) {
        const fs::path factor_path = require_file(config, "factors.path");
        inputs.push_back({factor_path, file_fnv1a64(factor_path)});
        CsvSchema schema{config.get_string("factors.date_column"), config.get_list("factors.columns"), delim};
        for (auto& s : load_csv(factor_path, schema)) {
            factor_series.push_back(std::move(s));
        }
    }
    if (factor_series.empty()) {
        throw DataError("no factors configured (set factor.<ID> entries or factors.path)");
    }
    const auto order = config.get_list("factors");
    if (!order.empty()) {
        std::vector<RawSeries> ordered;
        for (const auto& id : order) {
            auto it = std::find_if(factor_series.begin(), factor_series.end(),
                                   [&](const RawSeries& s) { return s.id() == id; });
            if (it == factor_series.end()) {
                throw DataError("factors: '" + id + "' is not a defined factor");
            }
            ordered.push_back(*it);
        }
        factor_series = std::move(ordered);
    }

    std::vector<TaggedSeries> tagged;
    for (const auto& s : asset_raw) {
        tagged.push_back({asset_kind == "levels" ? to_returns(s, context.return_kind) : s, SeriesRole::asset});
    }
    for (const auto& s : factor_series) {
        tagged.push_back({s, SeriesRole::factor});
    }
    if (config.has("risk_free.column") && asset_kind != "excess") {
        const std::string col = config.get_string("risk_free.column");
        auto it = series_by_name.find(col);
        if (it == series_by_name.end()) {
            throw DataError("risk_free.column: column '" + col + "' not found in series.path");
        }
        tagged.push_back({per_period_rate(it->second, context).renamed("__risk_free__"), SeriesRole::risk_free});
    }

    CalendarPolicy policy;
    policy.join_mode = parse_join_mode(config.get_string("join_mode"));
    policy.max_fill_gap = config.get_int("max_fill_gap");
    auto aligned = align(tagged, policy);
    return {std::move(aligned.panel), std::move(aligned.report), std::move(factor_series), std::move(inputs)};
}

AlignedPanel read_cached_panel(const fs::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) {
        throw DataError("cannot open panel manifest " + manifest_path.string());
    }
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw DataError("panel manifest " + manifest_path.string() + ": " + e.what());
    }
    const fs::path dir = manifest_path.parent_path().empty() ? fs::path(".") : manifest_path.parent_path();
    const fs::path panel_path = dir / manifest.at("panel_file").get<std::string>();
    const std::string digest = file_fnv1a64(panel_path);
    if (digest != manifest.at("panel_fnv1a64").get<std::string>()) {
        throw DataError("panel file " + panel_path.string() + " does not match its manifest hash");
    }
    return read_panel_csv(panel_path, manifest.at("asset_ids").get<std::vector<std::string>>(),
                          manifest.at("factor_ids").get<std::vector<std::string>>());
}

AlignedPanel load_panel(const Config& config) {
    if (config.has("panel")) {
        return read_cached_panel(config.resolve_path("panel"));
    }
    return ingest(config).panel;
}

void write_adf_report(std::ostream& out, const std::vector<std::string>& ids, const std::vector<std::string>& roles,
                      const std::vector<AdfResult>& results, const std::vector<std::string>& errors) {
    out << "series,role,chosen_lag,statistic,observations,deterministic,p_value_band,reject_1pct,reject_5pct,"
           "reject_10pct,error\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto& r = results[i];
        out << ids[i] << ',' << roles[i] << ',';
        if (!errors[i].empty()) {
            out << ",nan,,,,,,," << '"' << errors[i] << '"' << '\n';
            continue;
        }
        out << r.chosen_lag << ',' << fmt(r.statistic) << ',' << r.observations << ',' << to_string(r.deterministic)
            << ',' << to_string(r.p_value_band) << ',' << r.reject_at_1pct << ',' << r.reject_at_5pct << ','
            << r.reject_at_10pct << ",\n";
    }
}

void write_premium_table(std::ostream& out, const std::vector<std::string>& factor_ids,
                         const RiskPremiumEstimate& estimate) {
    out << "factor,lambda,robust_se,expected_premium\n";
    for (std::size_t j = 0; j < factor_ids.size(); ++j) {
        const auto k = static_cast<Index>(j);
        out << factor_ids[j] << ',' << fmt(estimate.lambda(k)) << ',' << fmt(estimate.robust_se(k)) << ','
            << fmt(estimate.expected_premium(k)) << '\n';
    }
    if (estimate.intercept) {
        out << "intercept," << fmt(*estimate.intercept) << ',' << fmt(estimate.intercept_se.value_or(NAN)) << ",nan\n";
    }
}

void write_grs_line(std::ostream& out, const GrsResult& grs, double test_level) {
    std::string flags;
    if (grs.regularized) {
        flags = "regularized";
    }
    if (grs.low_df) {
        flags += flags.empty() ? "low_df" : ";low_df";
    }
    out << "statistic,df1,df2,p_value,crit_5pct,crit_10pct,test_level,reject,flags\n";
    out << fmt(grs.statistic) << ',' << grs.df1 << ',' << grs.df2 << ',' << fmt(grs.p_value) << ','
        << fmt(grs.crit_5pct) << ',' << fmt(grs.crit_10pct) << ',' << fmt(test_level) << ','
        << (grs.p_value < test_level) << ',' << (flags.empty() ? "ok" : flags) << '\n';
}

void write_rolling_grs(std::ostream& out, const RollingSeries& series) {
    out << "date,grs_stat,df1,df2,p_value,crit_5pct,crit_10pct,flags\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& g = series.grs[i];
        out << format_date(series.dates[i]) << ',' << fmt(g.statistic) << ',' << g.df1 << ',' << g.df2 << ','
            << fmt(g.p_value) << ',' << fmt(g.crit_5pct) << ',' << fmt(g.crit_10pct) << ','
            << series.status[i].flags() << '\n';
    }
}

void write_rolling_premiums(std::ostream& out, const RollingSeries& series) {
    out << "date,factor,lambda,se,ci_lo,ci_hi\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const std::string date = format_date(series.dates[i]);
        const auto w = static_cast<Index>(i);
        for (std::size_t j = 0; j < series.factor_ids.size(); ++j) {
            const auto k = static_cast<Index>(j);
            out << date << ',' << series.factor_ids[j] << ',' << fmt(series.premiums[i].lambda(k)) << ','
                << fmt(series.premiums[i].robust_se(k)) << ',' << fmt(series.ci_lower(w, k)) << ','
                << fmt(series.ci_upper(w, k)) << '\n';
        }
    }
}

void write_rolling_json(std::ostream& out, const RollingSeries& series) {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json rows = json::array();
    for (std::size_t i = 0; i < series.size(); ++i) {
        const std::string date = format_date(series.dates[i]);
        const auto& g = series.grs[i];
        rows.push_back({{"date", date},
                        {"quantity", "grs"},
                        {"value", num(g.statistic)},
                        {"p_value", num(g.p_value)},
                        {"crit_5pct", num(g.crit_5pct)},
                        {"crit_10pct", num(g.crit_10pct)},
                        {"flags", series.status[i].flags()}});
        for (std::size_t j = 0; j < series.factor_ids.size(); ++j) {
            const auto k = static_cast<Index>(j);
            rows.push_back({{"date", date},
                            {"quantity", "lambda"},
                            {"factor", series.factor_ids[j]},
                            {"value", num(series.premiums[i].lambda(k))},
                            {"se", num(series.premiums[i].robust_se(k))}});
        }
    }
    out << rows.dump(1) << '\n';
}

void write_mc_report(std::ostream& summary, std::ostream& lambda_table, const McReport& report) {
    summary << "key,value\n";
    summary << "reps," << report.reps << '\n';
    summary << "failures," << report.failures << '\n';
    summary << "test_level," << fmt(report.test_level) << '\n';
    summary << "grs_rejection_rate," << fmt(report.rejection_rate) << '\n';
    summary << "grs_rejection_mc_se," << fmt(report.rejection_mc_se) << '\n';
    summary << "beta_mean_abs_bias," << fmt(report.beta_mean_abs_bias) << '\n';
    summary << "beta_rmse," << fmt(report.beta_rmse) << '\n';
    summary << "alpha_hat_sd_mean," << fmt(report.alpha_hat_sd.mean()) << '\n';

    lambda_table << "factor,truth,mean,bias,mc_se,rmse\n";
    for (const auto& s : report.lambda) {
        lambda_table << s.id << ',' << fmt(s.truth) << ',' << fmt(s.mean) << ',' << fmt(s.bias) << ','
                     << fmt(s.mc_se) << ',' << fmt(s.rmse) << '\n';
    }
}

int run_ingest(const Config& config, std::ostream& log) {
    const IngestResult result = ingest(config);
    const fs::path dir = output_dir(config);
    {
        auto out = open_output(dir / kPanelFile);
        write_panel_csv(out, result.panel);
    }
    {
        auto out = open_output(dir / kReportFile);
        write_alignment_report(out, result.report);
    }
    for (const auto& s : result.factor_series) {
        auto out = open_output(dir / ("factor_" + s.id() + ".csv"));
        write_series_csv(out, s);
    }

    json manifest;
    manifest["T"] = result.panel.observations();
    manifest["n"] = result.panel.assets();
    manifest["m"] = result.panel.factor_count();
    manifest["asset_ids"] = result.panel.asset_ids();
    manifest["factor_ids"] = result.panel.factor_ids();
    manifest["first_date"] = format_date(result.panel.dates().front());
    manifest["last_date"] = format_date(result.panel.dates().back());
    manifest["panel_file"] = kPanelFile;
    manifest["panel_fnv1a64"] = file_fnv1a64(dir / kPanelFile);
    manifest["join_mode"] = config.get_string("join_mode");
    manifest["return_kind"] = config.get_string("return_kind");
    json inputs = json::array();
    for (const auto& f : result.inputs) {
        inputs.push_back({{"path", f.path.generic_string()}, {"fnv1a64", f.fnv1a64}});
    }
    manifest["inputs"] = inputs;
    {
        auto out = open_output(dir / kManifestFile);
        out << manifest.dump(2) << '\n';
    }

    std::size_t dropped = 0;
    std::size_t filled = 0;
    for (const auto& e : result.report) {
        dropped += e.action == AlignAction::dropped;
        filled += e.action == AlignAction::filled;
    }
    log << "ingest: T=" << result.panel.observations() << " n=" << result.panel.assets()
        << " m=" << result.panel.factor_count() << " (" << dropped << " observations dropped, " << filled
        << " filled)\n";
    log << "wrote " << (dir / kManifestFile).string() << '\n';
    return 0;
}

int run_adf(const Config& config, std::ostream& log) {
    const AlignedPanel panel = load_panel(config);
    const Deterministic det = parse_deterministic(config.get_string("adf.deterministic"));
    const std::string max_lag_text = config.get_string("adf.max_lag");
    std::optional<int> max_lag;
    if (max_lag_text != "auto") {
        max_lag = config.get_int("adf.max_lag");
    }

    std::vector<std::string> ids;
    std::vector<std::string> roles;
    std::vector<AdfResult> results;
    std::vector<std::string> errors;
    std::size_t not_rejected = 0;
    for (const auto& tagged : panel.to_series()) {
        ids.push_back(tagged.series.id());
        roles.push_back(tagged.role == SeriesRole::asset ? "asset" : "factor");
        try {
            results.push_back(adf_test(tagged.series.values(), max_lag, det));
            errors.emplace_back();
            not_rejected += !results.back().reject_at_1pct;
        } catch (const std::exception& e) {
            results.emplace_back();
            errors.emplace_back(e.what());
        }
    }
    const fs::path dir = output_dir(config);
    auto out = open_output(dir / "adf.csv");
    write_adf_report(out, ids, roles, results, errors);
    const auto failures = std::count_if(errors.begin(), errors.end(), [](const std::string& e) { return !e.empty(); });
    log << "adf: " << ids.size() << " series, " << not_rejected << " without a 1% rejection, " << failures
        << " errors\n";
    return failures == 0 ? 0 : 1;
}

int run_estimate(const Config& config, std::ostream& log) {
    const AlignedPanel panel = load_panel(config);
    const double level = config.get_double("test_level");
    if (!(level > 0.0 && level < 1.0)) {
        throw DataError("test_level must lie in (0, 1)");
    }
    SecondPassOptions options;
    options.shanken = config.get_bool("shanken");
    options.intercept = config.get_bool("cs_intercept");

    const FirstPassFit fit = first_pass(panel);
    const GrsResult grs = grs_statistic(fit);
    const RiskPremiumEstimate est = second_pass(fit, mean_excess(panel.excess_returns()), options);

    const fs::path dir = output_dir(config);
    {
        auto out = open_output(dir / "premiums.csv");
        write_premium_table(out, panel.factor_ids(), est);
    }
    {
        auto out = open_output(dir / "grs.csv");
        write_grs_line(out, grs, level);
    }
    {
        auto out = open_output(dir / "loadings.csv");
        out << "asset,alpha";
        for (const auto& id : panel.factor_ids()) {
            out << ",beta_" << id;
        }
        out << '\n';
        for (Index i = 0; i < panel.assets(); ++i) {
            out << panel.asset_ids()[static_cast<std::size_t>(i)] << ',' << fmt(fit.alpha(i));
            for (Index j = 0; j < panel.factor_count(); ++j) {
                out << ',' << fmt(fit.beta(i, j));
            }
            out << '\n';
        }
    }
    log << "estimate: T=" << panel.observations() << " n=" << panel.assets() << " m=" << panel.factor_count()
        << " GRS=" << fmt(grs.statistic) << " p=" << fmt(grs.p_value)
        << (grs.p_value < level ? " (reject H0: alpha = 0)" : " (fail to reject H0: alpha = 0)") << '\n';
    if (grs.regularized || est.regularized) {
        log << "estimate: residual covariance was ridge-regularized\n";
    }
    return 0;
}

int run_roll(const Config& config, std::ostream& log) {
    const AlignedPanel panel = load_panel(config);
    const auto widths = config.get_int_list("window");
    if (widths.empty()) {
        throw DataError("window: no width given");
    }
    const int step = config.get_int("step");
    RollOptions options;
    options.threads = config.get_int("threads");
    options.second_pass.shanken = config.get_bool("shanken");
    options.second_pass.intercept = config.get_bool("cs_intercept");
    const bool with_json = config.get_bool("json");
    const fs::path dir = output_dir(config);

    std::size_t flagged_total = 0;
    for (const int w : widths) {
        const Index threshold = panel.assets() + panel.factor_count() + 31;
        if (w < threshold) {
            log << "warning: window " << w << " is below n + m + 31 = " << threshold
                << "; GRS degrees of freedom will be small\n";
        }
        const WindowPlan plan = plan_windows(panel.observations(), w, step);
        const RollingSeries series = roll(panel, plan, options);
        const std::string suffix = widths.size() > 1 ? "_w" + std::to_string(w) : "";
        {
            auto out = open_output(dir / ("rolling_grs" + suffix + ".csv"));
            write_rolling_grs(out, series);
        }
        {
            auto out = open_output(dir / ("rolling_premiums" + suffix + ".csv"));
            write_rolling_premiums(out, series);
        }
        if (with_json) {
            auto out = open_output(dir / ("rolling" + suffix + ".json"));
            write_rolling_json(out, series);
        }
        flagged_total += series.flagged();
        log << "roll: width " << w << ", " << series.size() << " windows, " << series.flagged() << " flagged ("
            << series.failed() << " failed)\n";
    }
    log << "roll: flag count " << flagged_total << '\n';
    return 0;
}

int run_simulate(const Config& config, std::ostream& log) {
    DgpSpec spec = default_spec(config.get_int("sim.n"), config.get_int("sim.m"), config.get_int("sim.T"),
                                static_cast<std::uint64_t>(std::stoull(config.get_string("seed"))));
    spec.alpha = Vector::Constant(spec.n, config.get_double("sim.alpha"));
    spec.innovations = parse_innovation(config.get_string("sim.innovations"));
    spec.t_df = config.get_double("sim.t_df");
    const double level = config.get_double("test_level");
    McOptions options;
    options.threads = config.get_int("threads");
    options.second_pass.shanken = config.get_bool("shanken");
    const McReport report = mc_experiment(spec, config.get_int("sim.reps"), level, options);

    const fs::path dir = output_dir(config);
    auto summary = open_output(dir / "simulation_summary.csv");
    auto lambda = open_output(dir / "simulation_lambda.csv");
    write_mc_report(summary, lambda, report);
    log << "simulate: " << report.reps << " reps (" << report.failures << " failed), GRS rejection rate "
        << fmt(report.rejection_rate) << " at level " << fmt(level) << '\n';
    return 0;
}

}  // namespace apt
