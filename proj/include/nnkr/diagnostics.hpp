#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "nnkr/certificates.hpp"
#include "nnkr/ensemble.hpp"
#include "nnkr/numerics.hpp"

// Desk-scale checks of the random-matrix statements: RIP constants by
// enumeration, sampled NSP checks, and Monte-Carlo tail rates next to their
// analytic bounds.

namespace nnkr {

enum class RipMethod { exhaustive, sampled };

std::string_view to_string(RipMethod method);

struct RipEstimate {
    std::size_t s = 0;
    double delta = 0.0;
    RipMethod method = RipMethod::exhaustive;
    std::uint64_t supports_checked = 0;
    /// True for the sampled method: the value only bounds delta_s from below.
    bool lower_bound = false;
};

/// Exhaustive enumeration stops here; larger instances need rip_sampled.
inline constexpr std::uint64_t kRipSupportGuard = 1'000'000;

/// C(N, s), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// delta_s(Phi) = max over |S| = s of max(lambda_max - 1, 1 - lambda_min) of
/// Phi_S^T Phi_S. Throws ParameterError for s = 0 or s > min(rows, cols) and
/// GuardExceeded when C(N, s) > kRipSupportGuard. The result does not depend
/// on the worker count.
RipEstimate rip_exhaustive(const RealMatrix& phi, std::size_t s, std::size_t workers = 1);

/// Same maximum over `supports` random supports. A lower bound on delta_s;
/// it can refute but never certify an NSP.
RipEstimate rip_sampled(const RealMatrix& phi, std::size_t s, std::size_t supports, std::uint64_t seed);

struct NspCheckReport {
    std::size_t trials = 0;
    std::size_t checks = 0;      // (v, S) pairs evaluated
    std::size_t violations = 0;  // pairs where the NSP inequality fails
    /// max over checks of ||v_S||_q / (rho/s^(1-1/q) ||v_{S^c}||_1 + tau ||A(v)||)
    double worst_ratio = 0.0;
    std::map<std::string, std::size_t> violations_by_kind;
};

/// Samples v of three kinds (Gaussian, sparse plus small dense part, and
/// near-nullspace vectors: the smallest right singular vector of the design
/// restricted to a random column set) and tests the NSP inequality both on
/// a random support and on the support of the s largest |v_i|. The
/// measurement norm follows cert.norm_tag: ||A(v)||_F for frobenius,
/// ||Phi v||_2 for l2-columns. Throws ParameterError for trials = 0.
NspCheckReport nsp_sampled_check(const MeasurementEnsemble& e, const NspCertificate& cert, std::size_t trials,
                                 std::uint64_t seed);

struct TailCheckReport {
    std::string kind;
    std::string law;
    std::vector<double> thresholds;  // eta or omega values
    std::vector<double> empirical_exceedance;
    std::vector<double> analytic_bound;      // clamped to [0, 1]
    std::vector<double> analytic_bound_raw;  // before clamping
    std::size_t samples = 0;
    std::map<std::string, double> parameters;
    /// Monte-Carlo mean, its standard error and the exact mean of the statistic.
    double sample_mean = 0.0;
    double standard_error = 0.0;
    double expected_mean = 0.0;

    /// Indices where the empirical rate exceeds the analytic bound.
    std::vector<std::size_t> crossings() const;
};

/// Rate of | ||a||^2 - n | > eta n over `samples` draws of a against the
/// per-vector bound 2 exp(-c eta^2 n / (2 psi2^4)) (eta = 0 gives rate 1 and
/// bound 1). Throws PreconditionError for samples < 100 and ParameterError for
/// eta outside [0, 1). The union bound over N vectors is echoed in parameters.
TailCheckReport norm_concentration_check(const SubgaussianLaw& law, std::size_t n, std::size_t count,
                                         const std::vector<double>& etas, std::size_t samples,
                                         std::uint64_t seed, double c = UniversalConstants{}.hanson_wright_c);

/// f(v) = ||P(a a^*)||_2^2 for v = (Re a, Im a) in R^(2n), evaluated as
/// 2 * sum over (k, l) in I of v_k^2 v_l^2, where I holds the pairs with
/// k != l, k != n + l and l != n + k (0-based: k, l < 2n). The factor 2 is
/// the sqrt(2) scaling of P squared. E f = 2n(n-1) for unit-variance entries.
/// Throws DimensionError for odd or < 4 dimensions.
double fourth_order_poly(const RealVector& v);

/// Rate of | ||X||^2 - m | >= m omega, X = P(a a^*) computed as f(Re a, Im a),
/// against column_norm_tail_bound.
/// Throws PreconditionError for n < psi2^4 or samples < 100.
TailCheckReport fourth_order_tail_check(const SubgaussianLaw& law, std::size_t n,
                                        const std::vector<double>& omegas, std::size_t samples,
                                        std::uint64_t seed, double gamma = UniversalConstants{}.tail_gamma);

/// max over integer p in [1, p_max] of p^(-1/r) (mean |X|^p)^(1/p): a lower
/// estimate of the psi_r norm (finite p grid, empirical moments); nondecreasing
/// in r for fixed samples. Throws
/// InputError for empty or non-finite samples, PreconditionError for fewer than
/// 1000 samples and ParameterError for r < 1 or p_max < 2.
double psi_r_estimate(const std::vector<double>& samples, double r, std::size_t p_max);

/// Largest constants keeping each analytic bound at or above the observed rate.
struct Calibration {
    double c_max = kInfinity;      // norm concentration
    double gamma_max = kInfinity;  // fourth-order tail
    std::vector<TailCheckReport> reports;
};

/// Calibration sweep: for every n, one norm_concentration_check over `etas`
/// and one fourth_order_tail_check over `omegas`. A zero observed rate does
/// not constrain the constant.
Calibration calibrate_constants(const SubgaussianLaw& law, const std::vector<std::size_t>& ns,
                                const std::vector<double>& etas, const std::vector<double>& omegas,
                                std::size_t samples, std::uint64_t seed);

}  // namespace nnkr
