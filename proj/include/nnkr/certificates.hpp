#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "nnkr/ensemble.hpp"
#include "nnkr/numerics.hpp"

// Closed-form constant chains of the recovery guarantees. Everything here is
// a pure formula evaluator; the Monte-Carlo counterparts live in diagnostics.

namespace nnkr {

/// 4 / sqrt(41): RIP levels at or above this do not yield an NSP.
inline const double kRipNspLimit = 4.0 / std::sqrt(41.0);

enum class NormTag { frobenius, l2_columns };

std::string_view to_string(NormTag tag);
NormTag parse_norm_tag(std::string_view tag);

/// l_q-robust nullspace property of order s with parameters (rho, tau):
///   ||v_S||_q <= rho / s^(1-1/q) ||v_{S^c}||_1 + tau ||A(v)||  for all v, |S| <= s.
struct NspCertificate {
    double q = 2.0;
    std::size_t s = 1;
    double rho = 0.0;
    double tau = 1.0;
    NormTag norm_tag = NormTag::frobenius;

    /// Throws ParameterError unless q >= 1, s >= 1, rho in [0, 1), tau > 0.
    void validate() const;
};

/// Universal constants that the theory leaves unspecified. Every evaluator
/// takes them explicitly; these defaults are the frozen calibration.
struct UniversalConstants {
    double hanson_wright_c = 0.1;   // c
    double tail_gamma = 0.01;       // gamma of the column-norm tail bound
    double rip_C = 1.0;             // C of the heavy-tailed RIP bound
    double rip_c_hat = 0.1;         // c-hat of the heavy-tailed RIP bound
};

/// q = 2 certificate implied by delta_{2s} <= delta:
///   rho = delta / (sqrt(1 - delta^2) - delta/4)
///   tau = sqrt(1 + delta) / (sqrt(1 - delta^2) - delta/4)
/// Throws DomainError unless 0 < delta < 4/sqrt(41); rho reaches 1 exactly
/// at that limit.
NspCertificate rip_to_nsp(double delta, std::size_t s, NormTag tag = NormTag::l2_columns);

struct CdConstants {
    double C = 1.0;  // (1 + rho)^2 / (1 - rho)
    double D = 3.0;  // (3 + rho) / (1 - rho)
};

/// Throws DomainError unless 0 <= rho < 1.
CdConstants cd_constants(double rho);

/// kappa(w) = max(w) / min(w) for strictly positive w.
double condition_number(const RealVector& w);

/// Transfer of the NSP to A o W^-1: rho -> kappa rho, tau -> max|w_i| tau.
/// Throws InfeasibleError when kappa * rho >= 1 and ParameterError for a
/// w that is not strictly positive.
NspCertificate weighted_nsp(const NspCertificate& cert, const RealVector& w);

struct MPlusCertificate {
    ComplexMatrix t;
    RealVector w;        // A^*(T)
    double kappa = 1.0;  // max(w) / min(w)
    double theta = 0.0;  // ||T||_F / ||w||_inf
};

/// Throws MPlusViolation when some w_i <= 0 and ContractError for a
/// non-Hermitian T. The dual norm is the Frobenius norm (self-dual).
MPlusCertificate mplus_certificate(const MeasurementEnsemble& e, const ComplexMatrix& t);

struct BoundBreakdown {
    double p = 2.0;
    double term_sparsity = 0.0;
    double term_noise = 0.0;
    double total = 0.0;
    std::map<std::string, double> constants;
};

/// Deterministic error bound under an NSP certificate and an M+ certificate:
///
///   C' kappa sigma_s / s^(1-1/p) + D' kappa / s^(1/q-1/p) (tau + theta / s^(1-1/q)) ||E||
///
/// with C' = 2 (1 + kappa rho)^2 / (1 - kappa rho), D' = 2 (3 + kappa rho) / (1 - kappa rho).
/// Throws InfeasibleError for kappa rho >= 1 and DomainError for p outside [1, q].
BoundBreakdown mplus_error_bound(const NspCertificate& cert, const MPlusCertificate& mp, double sigma_s,
                                 double e_norm, double p, std::size_t s);

/// Same bound from the scalars (kappa, theta) alone.
BoundBreakdown mplus_error_bound(const NspCertificate& cert, double kappa, double theta, double sigma_s,
                                 double e_norm, double p, std::size_t s);

struct SubgaussianConstants {
    double c2 = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;
    // intermediate values of the chain
    double rho = 0.0;
    double tau = 0.0;
    double kappa_eta = 1.0;  // (1 + eta) / (1 - eta)
    double C = 0.0;          // C(kappa_eta rho)
    double D = 0.0;          // D(kappa_eta rho)
};

/// c2 = 2 C(k rho) k, c3 = 2 D(k rho) k / (1 + eta), c4 = 2 tau (1 + eta), with
/// k = (1 + eta)/(1 - eta) and (rho, tau) from rip_to_nsp(delta).
/// Throws DomainError for eta outside (0, 1) or delta outside (0, 4/sqrt(41)),
/// InfeasibleError when k rho >= 1.
SubgaussianConstants subgaussian_constants(double eta, double delta);

/// The constants printed with the subgaussian recovery guarantee (rounded up).
inline constexpr double kPublishedC2 = 11.36;
inline constexpr double kPublishedC3 = 15.55;
inline constexpr double kPublishedC4 = 3.07;

/// c2 sigma_s / s^(1-1/p) + c3 (c4 + sqrt(n/s)) / s^(1/2-1/p) ||E||_F / n.
/// Throws DomainError for p outside [1, 2] and ParameterError for s < 1, n < 2.
BoundBreakdown subgaussian_error_bound(double c2, double c3, double c4, double sigma_s, double e_frob,
                                       std::size_t n, std::size_t s, double p);

/// alpha m / log^2(e N / (alpha m)) without the floor.
double sparsity_threshold_value(std::size_t n, std::size_t count, double alpha);

/// floor(alpha m / log^2(e N / (alpha m))), the largest admissible 2s.
/// Throws DomainError for N < m = 2n(n-1) and ParameterError for alpha outside (0, 1].
std::size_t sparsity_threshold(std::size_t n, std::size_t count, double alpha);

/// A probability bound clamped to [0, 1] together with its unclamped value.
struct ProbabilityBound {
    double value = 1.0;
    double raw = 1.0;
};

/// Real:    2 exp(-c min(t^2 / (K^4 F^2), t / (K^2 o)))
/// Complex: 4 exp(-c min(t^2 / (4 K^4 F^2), t / (sqrt(2) K^2 o)))
/// with F = ||Z||_F and o = ||Z||_op. t = 0 is allowed (raw value 2 or 4).
/// Throws ParameterError for non-positive K, F, o, c or negative t.
ProbabilityBound hanson_wright_bound(double t, double k, double frob, double op, double c, bool complex_case);

/// The ten terms whose minimum is zeta, in this order:
///   w^2/(L^2 mu^2 s^4), w/(L^2 (s^2 + 2 mu^2)), w^2/(L^4 (s^2 + mu^2)^2),
///   w^(2/3)/(L^2 mu^(2/3)), w/(L^3 mu), w^2 n/(L^6 mu^2),
///   w^(1/2)/L^2, w^(2/3)/L^(8/3), w/L^4, w^2 n/L^8
/// (w = omega, s^2 = sigma2). Divisions by zero give +infinity.
std::array<double, 10> fourth_order_zeta_terms(double omega, double l, double mu, double sigma2, std::size_t n);

/// min of fourth_order_zeta_terms. Throws ParameterError unless L >= 1,
/// omega > 0, mu >= 0, sigma2 >= 0 and n >= 2.
double fourth_order_zeta(double omega, double l, double mu, double sigma2, std::size_t n);

/// 2 exp(-gamma zeta n), the tail of |f(Z) - E f(Z)| >= n(n-1) omega.
ProbabilityBound fourth_order_tail_bound(double zeta, std::size_t n, double gamma);

struct MPlusConcentration {
    ProbabilityBound failure;  // 2 N exp(-c eta^2 n / (2 psi2^4))
    ProbabilityBound per_vector;  // 2 exp(-c eta^2 n / (2 psi2^4))
    double kappa_bound = 1.0;  // (1 + eta) / (1 - eta)
};

/// Norm concentration of the a_i: with the stated probability
/// n(1-eta) <= ||a_i||^2 <= n(1+eta) for all i, and then kappa(T = I) is at
/// most (1+eta)/(1-eta). Throws ParameterError unless 0 < eta < 1, psi2 >= 1.
MPlusConcentration mplus_concentration_bound(double eta, double psi2, std::size_t n, std::size_t count,
                                             double c);

/// P(| ||X_i||^2 - m | >= m omega) <= 2 exp(-gamma zeta n) with zeta from
/// fourth_order_zeta(omega, psi2, 0, 1, n); for omega <= 1 this is
/// 2 exp(-gamma omega^2 n / psi2^4). Throws PreconditionError for n < psi2^4
/// and ParameterError for negative omega or psi2 < 1.
ProbabilityBound column_norm_tail_bound(double omega, double psi2, std::size_t n, double gamma);

struct HeavyTailRip {
    double xi = 0.0;           // psi K + K'
    double delta_bound = 0.0;  // C xi^2 sqrt(s/m) log(eN/(s sqrt(s/m))) + theta
    ProbabilityBound first_term;  // exp(-c_hat K sqrt(s) log(eN/(s sqrt(s/m))))
};

/// RIP bound for Phi / sqrt(m) with independent subexponential columns
/// X_i in R^m, E||X_i||^2 = m, psi = max ||X_i||_psi1. The two remaining
/// failure terms are model probabilities and are not evaluated here.
/// Throws ParameterError for s > min(N, m), theta outside (0,1), K, K' < 1.
HeavyTailRip heavy_tail_rip_bound(std::size_t s, std::size_t m, std::size_t count, double psi, double k,
                                  double k_prime, double theta, const UniversalConstants& uc = {});

struct RipRegime {
    double C1 = 0.0;     // gamma delta^2 / (4 psi2^4)
    double alpha = 0.0;  // min(1, (delta / (6 C (psi1 + sqrt(1 + delta/2))^2))^2)
    double min_n = 0.0;  // 2 log(4N) / C1
    ProbabilityBound failure;  // 2 exp(-min(c_hat sqrt(alpha), C1/2) n)
    std::size_t max_2s = 0;    // sparsity_threshold(n, N, alpha)
};

/// Parameters under which Phi = P o A / sqrt(m) has delta_{2s} <= delta.
/// Throws ParameterError for delta outside (0, 1] or psi2 < 1, and
/// DomainError for N < m.
RipRegime rip_regime(double delta, double psi2, double psi1, std::size_t n, std::size_t count,
                     const UniversalConstants& uc = {});

/// One link of an exported constant chain.
struct NamedConstant {
    std::string name;
    double value = 0.0;
    std::string formula;            // how it was produced
    std::vector<std::string> inputs;  // names of the constants it depends on
};

struct ConstantChain {
    double eta = 1.0 / 3.0;
    double delta = 1.0 / 6.0;
    std::vector<NamedConstant> constants;
    std::vector<std::string> notes;

    /// Throws InputError when the name is missing.
    double value(std::string_view name) const;
};

/// Builds delta -> (rho, tau) -> (C, D) -> (c2, c3, c4), plus the C and D
/// values at the unweighted rho and, when n >= 2 and N >= m, the sparsity
/// threshold for the given alpha. Errors as in subgaussian_constants.
ConstantChain constant_chain(double eta, double delta, std::size_t n = 0, std::size_t count = 0,
                             double alpha = 1.0);

}  // namespace nnkr
