#include "nnkr/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nnkr/errors.hpp"

namespace nnkr {

Complex frobenius_inner(const ComplexMatrix& x, const ComplexMatrix& y) {
    if (x.rows() != y.rows() || x.cols() != y.cols()) {
        throw DimensionError("frobenius_inner: shape mismatch " + std::to_string(x.rows()) + "x" +
                             std::to_string(x.cols()) + " vs " + std::to_string(y.rows()) + "x" +
                             std::to_string(y.cols()));
    }
    // trace(X^* Y) = sum_kl conj(X_kl) Y_kl
    return (x.array().conjugate() * y.array()).sum();
}

double frobenius_norm(const ComplexMatrix& x) { return x.norm(); }

std::size_t offdiag_dim(std::size_t n) { return n < 2 ? 0 : 2 * n * (n - 1); }

RealVector p_vectorize(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("p_vectorize: matrix must be square");
    }
    const auto n = static_cast<std::size_t>(m.rows());
    if (n < 2) {
        throw DimensionError("p_vectorize: n must be at least 2 (output dimension would be 0)");
    }
    const std::size_t half = n * (n - 1);
    RealVector out(2 * half);
    std::size_t idx = 0;
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
        for (Eigen::Index l = 0; l < m.cols(); ++l) {
            if (k == l) continue;
            out[idx] = M_SQRT2 * m(k, l).real();
            out[idx + half] = M_SQRT2 * m(k, l).imag();
            ++idx;
        }
    }
    return out;
}

RealVector p_vectorize_outer(const ComplexVector& a) {
    const auto n = static_cast<std::size_t>(a.size());
    if (n < 2) {
        throw DimensionError("p_vectorize_outer: n must be at least 2");
    }
    const std::size_t half = n * (n - 1);
    RealVector out(2 * half);
    std::size_t idx = 0;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        for (Eigen::Index l = 0; l < a.size(); ++l) {
            if (k == l) continue;
            const Complex entry = a[k] * std::conj(a[l]);
            out[idx] = M_SQRT2 * entry.real();
            out[idx + half] = M_SQRT2 * entry.imag();
            ++idx;
        }
    }
    return out;
}

double lp_norm(const RealVector& v, double p) {
    if (std::isnan(p) || p < 1.0) {
        throw ParameterError("lp_norm: p must be >= 1 or infinity, got " + std::to_string(p));
    }
    if (v.size() == 0) return 0.0;
    if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
    if (p == 1.0) return v.cwiseAbs().sum();
    if (p == 2.0) return v.norm();
    // Scale by the max modulus so large p does not overflow.
    const double scale = v.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    double acc = 0.0;
    for (const double value : v) acc += std::pow(std::abs(value) / scale, p);
    return scale * std::pow(acc, 1.0 / p);
}

double best_s_term_residual(const RealVector& x, std::size_t s) {
    const auto n = static_cast<std::size_t>(x.size());
    if (s > n) {
        throw ParameterError("best_s_term_residual: s=" + std::to_string(s) + " exceeds N=" +
                             std::to_string(n));
    }
    if (s == n) return 0.0;
    std::vector<double> mags(n);
    for (std::size_t i = 0; i < n; ++i) mags[i] = std::abs(x[static_cast<Eigen::Index>(i)]);
    // Move the N - s smallest magnitudes to the front.
    const auto cut = mags.begin() + static_cast<std::ptrdiff_t>(n - s);
    std::nth_element(mags.begin(), cut, mags.end());
    double sum = 0.0;
    for (auto it = mags.begin(); it != cut; ++it) sum += *it;
    return sum;
}

ComplexMatrix hermitian_part(const ComplexMatrix& x) {
    if (x.rows() != x.cols()) throw DimensionError("hermitian_part: matrix must be square");
    return (x + x.adjoint()) * 0.5;
}

double hermitian_defect(const ComplexMatrix& x) {
    if (x.rows() != x.cols()) throw DimensionError("hermitian_defect: matrix must be square");
    if (x.size() == 0) return 0.0;
    return (x - x.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& x, double tol) {
    if (x.rows() != x.cols()) return false;
    return hermitian_defect(x) <= tol * std::max(1.0, x.norm());
}

}  // namespace nnkr
