#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nnkr/certificates.hpp"
#include "nnkr/ensemble.hpp"
#include "nnkr/solver.hpp"

namespace nnkr {

/// How the number of measurement vectors N is chosen for a given n.
///   "2m"        N = 2m = 4n(n-1)   (default)
///   "m"         N = m
///   "x<f>"      N = ceil(f * m), e.g. "x1.5"
///   "<count>"   fixed N, e.g. "1520"
struct NRule {
    double factor = 2.0;
    std::size_t fixed = 0;  // nonzero selects a fixed N

    std::size_t count(std::size_t n) const;
    std::string describe() const;
    /// Throws ConfigError for unparsable rules.
    static NRule parse(const std::string& text);
};

/// One solved trial; this is one CSV row.
struct TrialRecord {
    std::size_t n = 0;
    std::size_t s = 0;
    std::size_t count = 0;  // N
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    bool success = false;
    double error_l2 = 0.0;
    double residual = 0.0;   // ||A(x_sharp) - Y||_F
    double e_frob = 0.0;     // ||E||_F
    double kkt = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    double scale = 0.0;  // noise scale (noise experiment only)
    double bound = 0.0;  // error bound (noise experiment only)
};

/// The n^2/4 - n - 25 curve overlaid on the phase diagram.
double phase_boundary(double n);

struct PhaseConfig {
    std::vector<std::size_t> n_values{20, 25, 30};
    std::vector<std::size_t> s_values{20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120, 130, 140, 150};
    NRule n_rule;
    std::size_t trials = 20;
    double success_threshold = 1e-4;
    std::uint64_t seed = 0;
    LawKind law = LawKind::complex_gaussian;
    SolverConfig solver;
    std::size_t workers = 1;

    /// Throws ConfigError for empty grids, n < 2, zero trials or a
    /// non-positive threshold.
    void validate() const;
};

struct PhaseCell {
    std::size_t n = 0;
    std::size_t s = 0;
    std::size_t count = 0;
    std::size_t successes = 0;
    std::size_t trials = 0;
    bool skipped = false;  // s > N

    double rate() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials); }
};

/// Where the success rate falls through 1/2 along s for one n.
struct PhaseCrossing {
    std::size_t n = 0;
    double boundary = 0.0;
    /// Linear interpolation between the last s with rate >= 1/2 and the next.
    std::optional<double> s_star;
    bool censored_above = false;  // rate >= 1/2 at every s on the grid
    bool censored_below = false;  // rate < 1/2 already at the smallest s
};

struct PhaseDiagram {
    PhaseConfig config;
    std::vector<PhaseCell> cells;      // n-major, then s, as in the config
    std::vector<TrialRecord> records;  // canonical order (n, s, trial)

    const PhaseCell& cell(std::size_t n, std::size_t s) const;
    PhaseCrossing crossing(std::size_t n) const;
};

/// Per-trial seed: derive_seed(base, {trial stream, n, s, trial}).
std::uint64_t phase_trial_seed(std::uint64_t base, std::size_t n, std::size_t s, std::size_t trial);

/// One trial: fresh ensemble, x with uniform support and |N(0,1)| values,
/// Y = A(x), NNLS, success iff ||x_sharp - x||_2 <= threshold.
TrialRecord run_phase_trial(std::size_t n, std::size_t s, std::size_t trial, const PhaseConfig& cfg);

/// Runs every (n, s, trial) on cfg.workers threads. Results do not depend on
/// the worker count.
PhaseDiagram run_phase_transition(const PhaseConfig& cfg);

struct NoiseConfig {
    std::size_t n = 25;
    std::size_t count = 2400;
    std::size_t s = 20;
    std::vector<double> scales;  // ||E||_F values; empty selects 10 log-spaced values in [0.01, 1]
    std::size_t trials = 5;
    std::uint64_t seed = 0;
    LawKind law = LawKind::complex_gaussian;
    SolverConfig solver;
    double p = 2.0;
    double c2 = kPublishedC2;
    double c3 = kPublishedC3;
    double c4 = kPublishedC4;
    std::size_t workers = 1;

    std::vector<double> effective_scales() const;
    void validate() const;
};

struct NoiseRow {
    double scale = 0.0;  // ||E||_F
    double mean_error = 0.0;
    double max_error = 0.0;
    double bound = 0.0;  // subgaussian_error_bound with sigma_s = 0
    double max_residual_excess = 0.0;  // max ||A(x_sharp) - Y||_F - ||E||_F
};

struct NoiseReport {
    NoiseConfig config;
    std::vector<NoiseRow> rows;
    std::vector<TrialRecord> records;  // canonical order (scale, trial)
    double slope = 0.0;      // through-origin least squares of mean error on scale
    double r_squared = 0.0;  // centered R^2 of that fit
    bool all_below_bound = false;
    std::size_t dominance_violations = 0;  // residual > ||E||_F + 1e-9
    double sparsity_threshold_2s = 0.0;    // alpha = 1 value, for reference
};

/// A random Hermitian matrix with unit Frobenius norm (Gaussian entries).
ComplexMatrix random_hermitian_unit(std::size_t n, std::uint64_t seed);

/// For each trial a fixed instance (A, x, E0) is solved with E = scale * E0
/// for every scale.
NoiseReport run_noise_linearity(const NoiseConfig& cfg);

/// Fit of y ~ k x through the origin: slope and centered R^2.
struct OriginFit {
    double slope = 0.0;
    double r_squared = 0.0;
};
OriginFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y);

struct CovarianceScenario {
    std::size_t n = 16;       // sequence length
    std::size_t count = 128;  // devices N
    std::size_t s = 8;        // active devices
    std::size_t antennas = 100;  // M
    double noise_power = 0.0;
    LawKind law = LawKind::complex_gaussian;

    /// Throws ParameterError for s > N, M = 0 or negative noise power.
    void validate() const;
};

struct CovarianceResult {
    RealVector gamma;
    RealVector gamma_sharp;
    double error_l2 = 0.0;
    double relative_error = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    std::size_t detected = 0;
    RecoveryReport report;
};

/// Detection rule: gamma_sharp_i >= threshold * max(gamma_sharp) and > 0.
struct Detection {
    double recall = 0.0;
    double precision = 0.0;
    std::size_t detected = 0;
};
Detection detect_support(const RealVector& gamma, const RealVector& gamma_sharp, double threshold);

/// y_k = A_S diag(sqrt(gamma)) h_k + sqrt(noise_power) w_k, k = 1..M, with
/// h_k, w_k standard complex Gaussian; Y = (1/M) sum y_k y_k^*; gamma is
/// recovered by NNLS. `instance_seed` fixes (A, gamma); `sample_seed` fixes
/// the antenna observations. gamma may be forced to zero.
CovarianceResult run_covariance_matching(const CovarianceScenario& sc, std::uint64_t instance_seed,
                                         std::uint64_t sample_seed, const SolverConfig& solver = {},
                                         double detection_threshold = 0.1, bool zero_gamma = false);

struct CovmatchConfig {
    CovarianceScenario scenario;
    std::vector<std::size_t> antenna_counts{1, 10, 100, 1000};
    std::size_t trials = 20;
    std::uint64_t seed = 0;
    double detection_threshold = 0.1;
    SolverConfig solver;
    std::size_t workers = 1;

    void validate() const;
};

struct CovmatchRecord {
    std::size_t antennas = 0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    double error_l2 = 0.0;
    double relative_error = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

struct CovmatchRow {
    std::size_t antennas = 0;
    double median_relative_error = 0.0;
    double mean_relative_error = 0.0;
    double mean_recall = 0.0;
    double mean_precision = 0.0;
};

struct CovmatchReport {
    CovmatchConfig config;
    std::vector<CovmatchRow> rows;
    std::vector<CovmatchRecord> records;  // canonical order (M, trial)
};

/// Paired runs: trial t uses the same (A, gamma) for every M.
CovmatchReport run_covmatch_sweep(const CovmatchConfig& cfg);

}  // namespace nnkr
