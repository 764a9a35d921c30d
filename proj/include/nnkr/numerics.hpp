#pragma once

#include <complex>
#include <cstddef>
#include <limits>

#include <Eigen/Dense>

namespace nnkr {

using Complex = std::complex<double>;

/// Dense complex matrix, row-major, each entry a pair of doubles.
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Hilbert-Schmidt inner product <X, Y> = trace(X^* Y).
/// Throws DimensionError when the shapes differ.
Complex frobenius_inner(const ComplexMatrix& x, const ComplexMatrix& y);

double frobenius_norm(const ComplexMatrix& x);

/// Length of the off-diagonal vectorization of an n x n matrix: 2 n (n - 1).
std::size_t offdiag_dim(std::size_t n);

/// The off-diagonal operator P: C^{n x n} -> R^{2n(n-1)}.
///
/// Output layout: the off-diagonal pairs (k, l), k != l, are visited in
/// row-major order (k outer, l inner, diagonal skipped). The first n(n-1)
/// entries hold sqrt(2) Re(M_kl) in that order, the remaining n(n-1) entries
/// hold sqrt(2) Im(M_kl) in the same order. Hence
/// ||P(M)||_2^2 = 2 sum_{k != l} |M_kl|^2.
///
/// Throws DimensionError for non-square input or n < 2.
RealVector p_vectorize(const ComplexMatrix& m);

/// P(a a^*) computed directly from a, without forming the outer product.
RealVector p_vectorize_outer(const ComplexVector& a);

/// l_p norm for p >= 1, or the max modulus for p = kInfinity.
/// Throws ParameterError for p < 1 or NaN p.
double lp_norm(const RealVector& v, double p);

/// sigma_s(x)_1: the l1 distance from x to the closest s-sparse vector, i.e.
/// the sum of the N - s smallest magnitudes. Throws ParameterError if s > N.
double best_s_term_residual(const RealVector& x, std::size_t s);

/// (X + X^*) / 2.
ComplexMatrix hermitian_part(const ComplexMatrix& x);

/// Largest entry of |X - X^*|; zero for Hermitian input.
double hermitian_defect(const ComplexMatrix& x);

/// Relative Hermitian check: defect <= tol * max(1, ||X||_F).
bool is_hermitian(const ComplexMatrix& x, double tol = 1e-12);

}  // namespace nnkr
