// aptroll: batch command-line front end.
//
//   aptroll ingest   --config run.cfg
//   aptroll adf      --config run.cfg
//   aptroll estimate --config run.cfg
//   aptroll roll     --config run.cfg --window 500 --threads 8
//   aptroll simulate --config run.cfg --seed 7
//
// Settings resolve as: documented defaults < config file < APTROLL_* environment
// variables < command-line flags. Every config key has a --<key> flag twin.

#include <exception>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "apt/config.hpp"
#include "apt/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Rolling-window two-pass factor model estimation and generalized GRS testing"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "flat key = value config file")->check(CLI::ExistingFile);

    std::map<std::string, std::string> overrides;
    for (const auto& key : apt::documented_keys()) {
        const std::string name(key.name);
        auto* opt = app.add_option_function<std::string>(
            "--" + name, [&overrides, name](const std::string& v) { overrides[name] = v; }, std::string(key.help));
        opt->type_name("VALUE");
    }
    std::vector<std::string> factor_flags;
    app.add_option("--factor", factor_flags, "factor definition ID=recipe(inputs; k=v), repeatable");

    struct Command {
        const char* name;
        const char* help;
        int (*run)(const apt::Config&, std::ostream&);
    };
    const Command commands[] = {
        {"ingest", "load, build factors, align, and cache the panel", apt::run_ingest},
        {"adf", "ADF unit-root screen of every panel series", apt::run_adf},
        {"estimate", "full-sample two-pass estimation and GRS test", apt::run_estimate},
        {"roll", "rolling-window GRS and risk-premium series", apt::run_roll},
        {"simulate", "Monte Carlo size/power and estimator accuracy", apt::run_simulate},
    };
    std::map<const CLI::App*, const Command*> dispatch;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->fallthrough();
        dispatch[sub] = &c;
    }

    CLI11_PARSE(app, argc, argv);

    try {
        apt::Config config = config_path.empty() ? apt::Config{} : apt::Config::from_file(config_path);
        config.apply_environment();
        for (const auto& [k, v] : overrides) {
            config.set(k, v);
        }
        for (const auto& f : factor_flags) {
            const auto eq = f.find('=');
            if (eq == std::string::npos) {
                throw apt::DataError("--factor expects ID=recipe(...), got '" + f + "'");
            }
            config.set(std::string(apt::kFactorPrefix) + f.substr(0, eq), f.substr(eq + 1));
        }
        for (auto* sub : app.get_subcommands()) {
            return dispatch.at(sub)->run(config, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
