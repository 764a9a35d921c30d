#include <doctest.h>

#include <cmath>
#include <random>

#include "nnkr/errors.hpp"
#include "nnkr/numerics.hpp"

using namespace nnkr;

namespace {

ComplexMatrix random_matrix(std::size_t n, std::mt19937_64& g) {
    std::normal_distribution<double> d;
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = Complex(d(g), d(g));
    return m;
}

}  // namespace

TEST_CASE("frobenius_inner") {
    ComplexMatrix i2 = ComplexMatrix::Identity(2, 2);
    CHECK(frobenius_inner(i2, i2) == Complex(2.0, 0.0));

    ComplexMatrix e12 = ComplexMatrix::Zero(2, 2);
    e12(0, 1) = 1.0;
    CHECK(frobenius_inner(e12, e12) == Complex(1.0, 0.0));

    std::mt19937_64 g(1);
    const ComplexMatrix x = random_matrix(3, g);
    const ComplexMatrix y = random_matrix(3, g);
    Complex oracle = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) oracle += std::conj(x(i, j)) * y(i, j);
    CHECK(std::abs(frobenius_inner(x, y) - oracle) < 1e-12);

    CHECK_THROWS_AS(frobenius_inner(ComplexMatrix::Zero(2, 2), ComplexMatrix::Zero(3, 3)), DimensionError);
}

TEST_CASE("p_vectorize layout and norm") {
    CHECK(p_vectorize(ComplexMatrix::Identity(3, 3)) == RealVector::Zero(12));

    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = 7.0;
    m(1, 1) = -3.0;
    m(0, 1) = Complex(1.0, 2.0);
    const RealVector p = p_vectorize(m);
    REQUIRE(p.size() == 4);
    CHECK(p(0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(p(1) == 0.0);
    CHECK(p(2) == doctest::Approx(2.0 * std::sqrt(2.0)));
    CHECK(p(3) == 0.0);

    std::mt19937_64 g(2);
    for (int t = 0; t < 20; ++t) {
        const ComplexMatrix r = random_matrix(4, g);
        const ComplexMatrix h = hermitian_part(r);
        CHECK(p_vectorize(h).norm() <= std::sqrt(2.0) * frobenius_norm(h) + 1e-12);
        double off = 0.0;
        for (int k = 0; k < 4; ++k)
            for (int l = 0; l < 4; ++l)
                if (k != l) off += std::norm(r(k, l));
        CHECK(p_vectorize(r).squaredNorm() == doctest::Approx(2.0 * off).epsilon(1e-12));
    }

    CHECK_THROWS_AS(p_vectorize(ComplexMatrix::Zero(2, 3)), DimensionError);
    CHECK_THROWS_AS(p_vectorize(ComplexMatrix::Zero(1, 1)), DimensionError);
}

TEST_CASE("p_vectorize_outer matches the outer product") {
    std::mt19937_64 g(3);
    std::normal_distribution<double> d;
    for (int t = 0; t < 10; ++t) {
        ComplexVector a(5);
        for (int i = 0; i < 5; ++i) a(i) = Complex(d(g), d(g));
        const ComplexMatrix outer = a * a.adjoint();
        CHECK((p_vectorize_outer(a) - p_vectorize(outer)).norm() < 1e-12);
    }
}

TEST_CASE("lp_norm") {
    RealVector v(2);
    v << 3.0, 4.0;
    CHECK(lp_norm(v, 2.0) == doctest::Approx(5.0));
    CHECK(lp_norm(RealVector::Ones(4), 1.0) == doctest::Approx(4.0));
    CHECK(lp_norm(v, kInfinity) == 4.0);

    std::mt19937_64 g(4);
    std::normal_distribution<double> d;
    RealVector r(7);
    for (int i = 0; i < 7; ++i) r(i) = d(g);
    double sum = 0.0;
    for (int i = 0; i < 7; ++i) sum += std::pow(std::abs(r(i)), 1.5);
    CHECK(std::abs(lp_norm(r, 1.5) - std::pow(sum, 1.0 / 1.5)) < 1e-12);

    CHECK_THROWS_AS(lp_norm(v, 0.5), ParameterError);
    CHECK_THROWS_AS(lp_norm(v, std::nan("")), ParameterError);
}

TEST_CASE("best_s_term_residual") {
    RealVector x(3);
    x << 5.0, 1.0, 3.0;
    CHECK(best_s_term_residual(x, 1) == doctest::Approx(4.0));
    CHECK(best_s_term_residual(x, 0) == doctest::Approx(9.0));
    CHECK(best_s_term_residual(x, 3) == 0.0);

    RealVector sparse = RealVector::Zero(6);
    sparse(1) = 2.0;
    sparse(4) = -1.0;
    CHECK(best_s_term_residual(sparse, 2) == 0.0);
    CHECK_THROWS_AS(best_s_term_residual(x, 4), ParameterError);
}

TEST_CASE("hermitian helpers") {
    std::mt19937_64 g(5);
    const ComplexMatrix r = random_matrix(3, g);
    const ComplexMatrix h = hermitian_part(r);
    CHECK(hermitian_defect(h) == 0.0);
    CHECK(is_hermitian(h));
    CHECK_FALSE(is_hermitian(r));
}
