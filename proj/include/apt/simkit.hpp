#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apt/fmb.hpp"
#include "apt/panel.hpp"

namespace apt {

enum class Innovation { gaussian, student_t };

/**
 * @brief Data-generating process of the linear factor model.
 *
 * Factors are drawn with mean lambda_true and covariance factor_cov;
 * excess returns are alpha + beta f_t + e_t with e_t of covariance resid_cov.
 * Covariances may be positive semidefinite (a zero resid_cov gives a
 * noiseless panel). Student-t innovations are rescaled to unit variance.
 */
struct DgpSpec {
    int n = 0;
    int m = 0;
    int T = 0;
    Vector alpha;
    Matrix beta;  ///< n x m
    Vector lambda_true;
    Matrix factor_cov;
    Matrix resid_cov;
    std::uint64_t seed = 1;
    Innovation innovations = Innovation::gaussian;
    double t_df = 5.0;

    void validate() const;
};

/**
 * Default spec with seeded loadings: market-like first factor loadings in
 * [0.5, 1.5], others N(0, 0.5^2); daily factor vol 1%, residual vol 1.5%,
 * premiums of 2-5 basis points per day, alpha = 0.
 */
DgpSpec default_spec(int n = 33, int m = 9, int T = 6300, std::uint64_t seed = 20240101);

/// Deterministic for a fixed seed. Dates are consecutive weekdays from 2000-01-03.
AlignedPanel simulate(const DgpSpec& spec);

/// Seed of replication `rep`, independent of scheduling.
std::uint64_t replication_seed(std::uint64_t base_seed, std::uint64_t rep);

struct McOptions {
    int threads = 1;
    SecondPassOptions second_pass;
};

/// Sampling summary of one estimated quantity across replications.
struct EstimatorStats {
    std::string id;
    double truth = 0.0;
    double mean = 0.0;
    double bias = 0.0;
    double mc_se = 0.0;  ///< standard error of the bias (sd / sqrt(reps)); NaN for one rep
    double rmse = 0.0;
};

struct McReport {
    int reps = 0;
    int failures = 0;
    double test_level = 0.05;
    double rejection_rate = 0.0;
    double rejection_mc_se = 0.0;
    std::vector<EstimatorStats> lambda;  ///< one per factor
    double beta_mean_abs_bias = 0.0;
    double beta_rmse = 0.0;
    Vector alpha_hat_sd;                 ///< per-asset sd of alpha-hat across replications
    std::vector<double> grs_statistics;  ///< per replication, NaN for failures
};

/**
 * Runs simulate -> first pass -> GRS -> second pass per replication and
 * summarizes GRS size/power and lambda/beta bias and RMSE. Replications are
 * split across threads; results are independent of the thread count.
 */
McReport mc_experiment(const DgpSpec& spec, int reps, double test_level, const McOptions& options = {});

Innovation parse_innovation(std::string_view text);

}  // namespace apt
