#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nnkr/numerics.hpp"
#include "nnkr/rng.hpp"

namespace nnkr {

enum class LawKind {
    complex_gaussian,    // Re, Im ~ N(0, 1/2)
    complex_rademacher,  // (+-1 +- i) / sqrt(2)
    uniform_symmetric,   // Re, Im ~ U[-sqrt(3/2), sqrt(3/2)]
    real_gaussian,       // Re ~ N(0, 1), Im = 0; sensitivity variant only, not a Model-1 law
};

std::string_view to_string(LawKind kind);
/// Parses the tags printed by to_string; throws ParameterError otherwise.
LawKind parse_law(std::string_view tag);

/// Exact psi_2 (Orlicz) norm of one real coordinate of the law.
double coordinate_psi2_norm(LawKind kind);

struct SubgaussianLaw {
    LawKind kind = LawKind::complex_gaussian;
    /// Uniform bound on the psi_2 norms of the real and imaginary parts; >= 1.
    double psi2_bound = 1.0;

    /// The law with psi2_bound = max(1, coordinate_psi2_norm(kind)).
    static SubgaussianLaw standard(LawKind kind);
    /// Same law with a looser (larger) psi_2 bound. Throws ParameterError when
    /// the requested bound is below the law's own psi_2 norm or below 1.
    SubgaussianLaw with_psi2_bound(double bound) const;
};

/// Draws one coordinate of the law.
Complex sample_coordinate(const SubgaussianLaw& law, std::mt19937_64& engine);

/// Draws a vector of n iid coordinates.
ComplexVector sample_vector(const SubgaussianLaw& law, std::size_t n, std::mt19937_64& engine);

/// The N vectors a_i of the rank-one model together with how they were made.
/// Sampled ensembles regenerate bit-for-bit from (seed, n, N, law); every
/// vector a_i depends only on (seed, i).
class MeasurementEnsemble {
public:
    /// Throws DimensionError for n < 2 or N < 1.
    static MeasurementEnsemble sample(std::size_t n, std::size_t count, const SubgaussianLaw& law,
                                      std::uint64_t seed);
    /// Hand-set vectors (column i is a_i). Such ensembles cannot be saved.
    static MeasurementEnsemble from_vectors(Eigen::MatrixXcd columns);

    std::size_t n() const { return static_cast<std::size_t>(vectors_.rows()); }
    std::size_t size() const { return static_cast<std::size_t>(vectors_.cols()); }
    /// m = 2 n (n - 1), the length of P(a_i a_i^*).
    std::size_t m() const { return offdiag_dim(n()); }

    const Eigen::MatrixXcd& vectors() const { return vectors_; }
    ComplexVector vector(std::size_t i) const { return vectors_.col(static_cast<Eigen::Index>(i)); }
    /// ||a_i||_2^2 for every i.
    RealVector squared_norms() const { return vectors_.colwise().squaredNorm().transpose(); }

    const std::optional<SubgaussianLaw>& law() const { return law_; }
    const std::optional<std::uint64_t>& seed() const { return seed_; }
    bool regenerable() const { return law_.has_value() && seed_.has_value(); }

private:
    MeasurementEnsemble(Eigen::MatrixXcd vectors, std::optional<SubgaussianLaw> law,
                        std::optional<std::uint64_t> seed)
        : vectors_(std::move(vectors)), law_(law), seed_(seed) {}

    Eigen::MatrixXcd vectors_;
    std::optional<SubgaussianLaw> law_;
    std::optional<std::uint64_t> seed_;
};

/// A(x) = sum_i x_i a_i a_i^*. Throws DimensionError when x.size() != N.
ComplexMatrix forward(const MeasurementEnsemble& e, const RealVector& x);

/// A^*(T) = (a_i^* T a_i)_i for Hermitian T.
/// Throws DimensionError for a wrong shape and ContractError when T is not
/// Hermitian (relative tolerance 1e-12).
RealVector adjoint(const MeasurementEnsemble& e, const ComplexMatrix& t);

/// Phi = P o A / sqrt(m) as a dense m x N real matrix; column i is
/// P(a_i a_i^*) / sqrt(m).
RealMatrix build_phi(const MeasurementEnsemble& e);

/// Nonnegative sparse signal: strictly positive values on a sorted support.
struct SparseNonnegSignal {
    std::size_t dim = 0;
    std::vector<std::size_t> support;
    std::vector<double> values;

    /// Throws ParameterError when the invariants do not hold.
    void validate() const;
    RealVector dense() const;
    std::size_t sparsity() const { return support.size(); }

    /// Support uniform over all C(N, s) subsets; values |g| with g ~ N(0, 1).
    static SparseNonnegSignal sample(std::size_t dim, std::size_t s, std::mt19937_64& engine);
};

// Ensemble artifact: a text header that is enough to regenerate the vectors.
//
//   nnkr-ensemble 1
//   seed <uint64>
//   n <int>
//   N <int>
//   law <tag>
//   psi2 <double>
//
// Lines are LF-terminated; the psi2 line is optional on load.
void save_ensemble(const MeasurementEnsemble& e, std::ostream& out);
MeasurementEnsemble load_ensemble(std::istream& in);

}  // namespace nnkr
