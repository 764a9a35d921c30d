#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "nnkr/ensemble.hpp"
#include "nnkr/numerics.hpp"

namespace nnkr {

enum class SolverAlgorithm { active_set, projected_gradient };

std::string_view to_string(SolverAlgorithm algorithm);
SolverAlgorithm parse_algorithm(std::string_view tag);

struct SolverConfig {
    /// Bound on the normalized KKT residual (see kkt_residual).
    double kkt_tolerance = 1e-9;
    std::size_t max_iterations = 50000;
    SolverAlgorithm algorithm = SolverAlgorithm::active_set;
    /// Normalization 1 / ||Y||_F used by the KKT measure; 0 selects it automatically.
    double objective_scale = 0.0;
    /// Keep the objective value of every iterate (projected gradient only).
    bool record_objective_trace = false;

    /// Throws ParameterError for non-positive tolerances or zero iterations.
    void validate() const;
};

struct RecoveryReport {
    RealVector x_sharp;
    /// ||A(x_sharp) - Y||_F against the Y that was passed in.
    double residual_frobenius = 0.0;
    double kkt_residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    /// Y was not Hermitian and its Hermitian part was fitted instead.
    bool used_hermitian_part = false;
    std::vector<double> objective_trace;
    /// p -> ||x_sharp - x||_p, filled by attach_ground_truth.
    std::map<double, double> error_norms;
};

/// x_sharp = argmin_{z >= 0} ||A(z) - Y||_F.
///
/// A non-Hermitian Y is replaced by its Hermitian part; the skew part is
/// orthogonal to the range of A and only shifts the objective. A feasible
/// warm start is used as the starting point (projected gradient) or as a
/// fallback candidate (active set), so the result is never worse than it.
///
/// Throws DimensionError on shape mismatch and InputError on NaN input.
/// Non-convergence is reported through converged = false.
RecoveryReport solve_nnls(const MeasurementEnsemble& e, const ComplexMatrix& y,
                          const SolverConfig& cfg = {},
                          const std::optional<RealVector>& warm_start = std::nullopt);

/// g = 2 A^*(A(z) - herm(Y)), the gradient of ||A(z) - Y||_F^2.
RealVector nnls_gradient(const MeasurementEnsemble& e, const ComplexMatrix& y, const RealVector& z);

/// Normalized KKT residual of the nonnegative least-squares problem:
///
///   max( max_i (-g_i)_+ * scale / ||A_i||_F ,  max_i |g_i z_i| * scale^2 )
///
/// with g = nnls_gradient(e, Y, z), A_i = a_i a_i^* and scale = 1/||Y||_F
/// (1 when Y = 0). Both terms are invariant under (Y, z) -> (tY, tz), and the
/// value is zero exactly at a minimizer. Throws ContractError for z with a
/// negative entry.
double kkt_residual(const MeasurementEnsemble& e, const ComplexMatrix& y, const RealVector& z,
                    double objective_scale = 0.0);

/// Fills report.error_norms for the given p values (kInfinity allowed).
void attach_ground_truth(RecoveryReport& report, const RealVector& truth,
                         const std::vector<double>& ps = {1.0, 2.0, kInfinity});

/// Real isometric coordinates of the Hermitian matrices: the diagonal entries
/// followed by sqrt(2) Re and sqrt(2) Im of each strictly upper entry (k < l,
/// row-major). For Hermitian H1, H2: <h(H1), h(H2)> = <H1, H2>.
RealVector hermitian_coordinates(const ComplexMatrix& h);

/// The n^2 x N matrix whose column i is hermitian_coordinates(a_i a_i^*).
RealMatrix hermitian_design(const MeasurementEnsemble& e);

}  // namespace nnkr
