#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "apt/config.hpp"
#include "apt/fmb.hpp"
#include "apt/grs.hpp"
#include "apt/panel.hpp"
#include "apt/rolling.hpp"
#include "apt/simkit.hpp"
#include "apt/stationarity.hpp"

namespace apt {

struct InputFile {
    std::filesystem::path path;
    std::string fnv1a64;
};

struct IngestResult {
    AlignedPanel panel;
    AlignmentReport report;
    std::vector<RawSeries> factor_series;  ///< built factors before alignment
    std::vector<InputFile> inputs;
};

/// 64-bit FNV-1a digest of a file's bytes, as 16 hex digits.
std::string file_fnv1a64(const std::filesystem::path& path);

/// Reads the configured inputs, builds factors, and aligns everything into a panel.
IngestResult ingest(const Config& config);

/// The cached panel named by `panel`, or a fresh ingest.
AlignedPanel load_panel(const Config& config);

/// Reads a manifest written by run_ingest and the panel file it points to.
AlignedPanel read_cached_panel(const std::filesystem::path& manifest);

// Report writers; every number is written in shortest round-trip form.
void write_adf_report(std::ostream& out, const std::vector<std::string>& ids, const std::vector<std::string>& roles,
                      const std::vector<AdfResult>& results, const std::vector<std::string>& errors);
void write_premium_table(std::ostream& out, const std::vector<std::string>& factor_ids,
                         const RiskPremiumEstimate& estimate);
void write_grs_line(std::ostream& out, const GrsResult& grs, double test_level);
void write_rolling_grs(std::ostream& out, const RollingSeries& series);
void write_rolling_premiums(std::ostream& out, const RollingSeries& series);
void write_rolling_json(std::ostream& out, const RollingSeries& series);
void write_mc_report(std::ostream& summary, std::ostream& lambda_table, const McReport& report);

/// Subcommands. Each returns the process exit code; errors surface as exceptions.
int run_ingest(const Config& config, std::ostream& log);
int run_adf(const Config& config, std::ostream& log);
int run_estimate(const Config& config, std::ostream& log);
int run_roll(const Config& config, std::ostream& log);
int run_simulate(const Config& config, std::ostream& log);

}  // namespace apt
