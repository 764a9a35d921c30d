#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nnkr/ensemble.hpp"
#include "nnkr/errors.hpp"
#include "nnkr/rng.hpp"

using namespace nnkr;

TEST_CASE("laws") {
    CHECK(parse_law("complex-gaussian") == LawKind::complex_gaussian);
    CHECK(parse_law(to_string(LawKind::uniform_symmetric)) == LawKind::uniform_symmetric);
    CHECK_THROWS_AS(parse_law("cauchy"), ParameterError);

    CHECK(coordinate_psi2_norm(LawKind::complex_gaussian) == doctest::Approx(std::sqrt(4.0 / 3.0)));
    CHECK(coordinate_psi2_norm(LawKind::complex_rademacher) == doctest::Approx(1.0 / std::sqrt(2.0 * std::log(2.0))));
    // psi_2 of one coordinate solves E exp(X^2 / t^2) = 2.
    const double t = coordinate_psi2_norm(LawKind::uniform_symmetric);
    const double a = std::sqrt(1.5);
    double integral = 0.0;
    const int steps = 200000;
    for (int i = 0; i < steps; ++i) {
        const double x = (i + 0.5) * a / steps;
        integral += std::exp(x * x / (t * t));
    }
    CHECK(integral / steps == doctest::Approx(2.0).epsilon(1e-6));

    const auto law = SubgaussianLaw::standard(LawKind::complex_rademacher);
    CHECK(law.psi2_bound == 1.0);
    CHECK(law.with_psi2_bound(3.0).psi2_bound == 3.0);
    CHECK_THROWS_AS(law.with_psi2_bound(0.5), ParameterError);
}

TEST_CASE("sampling is deterministic and normalized") {
    const auto law = SubgaussianLaw::standard(LawKind::complex_gaussian);
    const auto e1 = MeasurementEnsemble::sample(4, 8, law, 7);
    const auto e2 = MeasurementEnsemble::sample(4, 8, law, 7);
    CHECK(e1.vectors() == e2.vectors());
    CHECK(e1.m() == 24);
    CHECK(e1.regenerable());

    const auto big = MeasurementEnsemble::sample(16, 10000, law, 11);
    CHECK(big.squared_norms().mean() == doctest::Approx(16.0).epsilon(0.5 / 16.0));

    const auto rad = MeasurementEnsemble::sample(5, 20, SubgaussianLaw::standard(LawKind::complex_rademacher), 3);
    CHECK((rad.vectors().cwiseAbs2().array() - 1.0).abs().maxCoeff() < 1e-15);

    // The first vectors do not depend on N.
    const auto e3 = MeasurementEnsemble::sample(4, 12, law, 7);
    CHECK(e3.vectors().leftCols(8) == e1.vectors());
}

TEST_CASE("forward and adjoint") {
    const auto law = SubgaussianLaw::standard(LawKind::complex_gaussian);
    const auto e = MeasurementEnsemble::sample(3, 5, law, 1);

    RealVector unit = RealVector::Zero(5);
    unit(2) = 1.0;
    const ComplexVector a2 = e.vector(2);
    CHECK((forward(e, unit) - a2 * a2.adjoint()).norm() < 1e-14);
    CHECK(forward(e, RealVector::Zero(5)).norm() == 0.0);

    Engine g = make_engine(9, {0});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RealVector x(5);
    for (int i = 0; i < 5; ++i) x(i) = u(g);
    ComplexMatrix oracle = ComplexMatrix::Zero(3, 3);
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) oracle(k, l) += x(i) * e.vectors()(k, i) * std::conj(e.vectors()(l, i));
    CHECK((forward(e, x) - oracle).norm() < 1e-12);

    CHECK((adjoint(e, ComplexMatrix::Identity(3, 3)) - e.squared_norms()).norm() < 1e-12);
    CHECK(adjoint(e, ComplexMatrix::Zero(3, 3)).norm() == 0.0);

    ComplexMatrix t(3, 3);
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) t(k, l) = Complex(u(g) - 0.5, u(g) - 0.5);
    t = hermitian_part(t);
    const double lhs = frobenius_inner(forward(e, x), t).real();
    const double rhs = x.dot(adjoint(e, t));
    CHECK(std::abs(lhs - rhs) < 1e-10);

    ComplexMatrix skew = ComplexMatrix::Zero(3, 3);
    skew(0, 1) = 1.0;
    CHECK_THROWS_AS(adjoint(e, skew), ContractError);
    CHECK_THROWS_AS(forward(e, RealVector::Zero(4)), DimensionError);
}

TEST_CASE("build_phi") {
    const auto law = SubgaussianLaw::standard(LawKind::complex_gaussian);
    const auto e = MeasurementEnsemble::sample(4, 6, law, 2);
    const RealMatrix phi = build_phi(e);
    REQUIRE(phi.rows() == 24);
    const double sm = std::sqrt(24.0);
    for (int i = 0; i < 6; ++i) {
        const ComplexVector a = e.vector(static_cast<std::size_t>(i));
        CHECK((phi.col(i) - p_vectorize(a * a.adjoint()) / sm).norm() < 1e-14);
    }
    RealVector x = RealVector::LinSpaced(6, 0.1, 0.6);
    CHECK(std::abs((phi * x).norm() - p_vectorize(forward(e, x)).norm() / sm) < 1e-12);

    // E ||column||^2 = 1.
    const auto big = MeasurementEnsemble::sample(6, 4000, law, 5);
    CHECK(build_phi(big).colwise().squaredNorm().mean() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("sparse signals") {
    Engine g = make_engine(4, {1});
    const auto sig = SparseNonnegSignal::sample(50, 7, g);
    CHECK(sig.sparsity() == 7);
    const RealVector d = sig.dense();
    CHECK(d.minCoeff() >= 0.0);
    CHECK((d.array() > 0.0).count() == 7);
    CHECK_THROWS(SparseNonnegSignal::sample(5, 6, g));
}

TEST_CASE("ensemble artifacts round trip") {
    const auto law = SubgaussianLaw::standard(LawKind::uniform_symmetric).with_psi2_bound(2.0);
    const auto e = MeasurementEnsemble::sample(3, 4, law, 99);
    std::stringstream s;
    save_ensemble(e, s);
    const auto back = load_ensemble(s);
    CHECK(back.vectors() == e.vectors());
    CHECK(back.law()->psi2_bound == 2.0);

    std::stringstream bad("nnkr-ensemble 1\nn 3\n");
    CHECK_THROWS_AS(load_ensemble(bad), InputError);

    Eigen::MatrixXcd v(2, 2);
    v << 1.0, 0.0, 0.0, 2.0;
    std::stringstream out;
    CHECK_THROWS(save_ensemble(MeasurementEnsemble::from_vectors(v), out));
}
