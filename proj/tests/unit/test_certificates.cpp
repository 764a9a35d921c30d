#include <doctest.h>

#include <cmath>

#include "nnkr/certificates.hpp"
#include "nnkr/ensemble.hpp"
#include "nnkr/errors.hpp"

using namespace nnkr;

TEST_CASE("rip_to_nsp") {
    const auto half = rip_to_nsp(0.5, 3);
    const double den = std::sqrt(0.75) - 0.125;
    CHECK(half.rho == doctest::Approx(0.5 / den).epsilon(1e-14));
    CHECK(half.tau == doctest::Approx(std::sqrt(1.5) / den).epsilon(1e-14));
    CHECK(half.rho == doctest::Approx(0.6748).epsilon(1e-4));
    CHECK(half.tau == doctest::Approx(1.6529).epsilon(1e-4));
    CHECK(half.s == 3);
    CHECK(half.q == 2.0);

    const auto tiny = rip_to_nsp(1e-9, 1);
    CHECK(tiny.rho < 2e-9);
    CHECK(tiny.tau == doctest::Approx(1.0));

    const auto sixth = rip_to_nsp(1.0 / 6.0, 1);
    CHECK(sixth.rho <= 0.18);
    CHECK(sixth.tau <= 1.15);

    CHECK_THROWS_AS(rip_to_nsp(0.0, 1), DomainError);
    CHECK_THROWS_AS(rip_to_nsp(kRipNspLimit, 1), DomainError);
    CHECK_THROWS_AS(rip_to_nsp(0.9, 1), DomainError);
    CHECK(rip_to_nsp(kRipNspLimit * (1 - 1e-12), 1).rho < 1.0);
}

TEST_CASE("cd_constants") {
    CHECK(cd_constants(0.0).C == 1.0);
    CHECK(cd_constants(0.0).D == 3.0);
    const auto at = cd_constants(rip_to_nsp(0.5, 1).rho);
    CHECK(at.C == doctest::Approx(8.6).epsilon(0.01));
    CHECK(at.D == doctest::Approx(11.3).epsilon(0.01));
    const auto chain = cd_constants(0.353);
    CHECK(chain.C == doctest::Approx(1.353 * 1.353 / 0.647));
    CHECK(chain.D == doctest::Approx(3.353 / 0.647));
    CHECK(chain.C == doctest::Approx(2.829).epsilon(1e-3));
    CHECK(chain.D == doctest::Approx(5.182).epsilon(1e-3));
    CHECK_THROWS_AS(cd_constants(1.0), DomainError);
    CHECK_THROWS_AS(cd_constants(-0.1), DomainError);
}

TEST_CASE("weighted_nsp") {
    NspCertificate cert;
    cert.rho = 0.18;
    cert.tau = 1.1;
    const auto same = weighted_nsp(cert, RealVector::Ones(4));
    CHECK(same.rho == doctest::Approx(0.18));
    CHECK(same.tau == doctest::Approx(1.1));

    RealVector w(2);
    w << 1.0, 2.0;
    const auto two = weighted_nsp(cert, w);
    CHECK(two.rho == doctest::Approx(0.36));
    CHECK(two.tau == doctest::Approx(2.2));

    w << 1.0, 6.0;
    CHECK_THROWS_AS(weighted_nsp(cert, w), InfeasibleError);
    w << 0.0, 1.0;
    CHECK_THROWS_AS(weighted_nsp(cert, w), ParameterError);
}

TEST_CASE("mplus_certificate") {
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(2, 2);
    v(0, 0) = 1.0;
    v(1, 1) = 2.0;
    const auto e = MeasurementEnsemble::from_vectors(v);
    const auto mp = mplus_certificate(e, ComplexMatrix::Identity(2, 2));
    CHECK(mp.w(0) == doctest::Approx(1.0));
    CHECK(mp.w(1) == doctest::Approx(4.0));
    CHECK(mp.kappa == doctest::Approx(4.0));
    CHECK(mp.theta == doctest::Approx(std::sqrt(2.0) / 4.0));

    const auto g = MeasurementEnsemble::sample(5, 30, SubgaussianLaw::standard(LawKind::complex_gaussian), 2);
    const auto a = mplus_certificate(g, ComplexMatrix::Identity(5, 5));
    const auto b = mplus_certificate(g, 3.5 * ComplexMatrix::Identity(5, 5));
    CHECK(a.kappa == doctest::Approx(g.squared_norms().maxCoeff() / g.squared_norms().minCoeff()));
    CHECK(b.kappa == doctest::Approx(a.kappa));
    CHECK(b.theta == doctest::Approx(a.theta));

    ComplexMatrix t = ComplexMatrix::Zero(2, 2);
    t(0, 0) = 1.0;
    t(1, 1) = -1.0;
    CHECK_THROWS_AS(mplus_certificate(e, t), MPlusViolation);
}

TEST_CASE("mplus_error_bound") {
    NspCertificate cert;
    cert.rho = 0.0;
    cert.tau = 1.0;
    auto zero = mplus_error_bound(cert, 1.0, 0.5, 0.0, 0.0, 2.0, 4);
    CHECK(zero.total == 0.0);
    CHECK(zero.constants.at("C'") == doctest::Approx(2.0));
    CHECK(zero.constants.at("D'") == doctest::Approx(6.0));

    cert.rho = 0.17649;
    cert.tau = 1.14379;
    const double kappa = 2.0, theta = 0.7, sigma = 0.3, e = 0.05;
    const auto b = mplus_error_bound(cert, kappa, theta, sigma, e, 2.0, 4);
    const double kr = kappa * 0.17649;
    const double cp = 2.0 * (1.0 + kr) * (1.0 + kr) / (1.0 - kr);
    const double dp = 2.0 * (3.0 + kr) / (1.0 - kr);
    CHECK(std::abs(b.term_sparsity - cp * kappa * sigma / 2.0) < 1e-12);
    CHECK(std::abs(b.term_noise - dp * kappa * (1.14379 + theta / 2.0) * e) < 1e-12);

    const auto p1 = mplus_error_bound(cert, kappa, theta, sigma, e, 1.0, 4);
    CHECK(std::abs(p1.term_sparsity - cp * kappa * sigma) < 1e-12);
    CHECK(std::abs(p1.term_noise - dp * kappa * 2.0 * (1.14379 + theta / 2.0) * e) < 1e-12);

    CHECK_THROWS_AS(mplus_error_bound(cert, kappa, theta, sigma, e, 3.0, 4), DomainError);
    CHECK_THROWS_AS(mplus_error_bound(cert, 6.0, theta, sigma, e, 2.0, 4), InfeasibleError);
}

TEST_CASE("subgaussian constants and bound") {
    const auto c = subgaussian_constants(1.0 / 3.0, 1.0 / 6.0);
    CHECK(c.kappa_eta == doctest::Approx(2.0));
    CHECK(c.c2 == doctest::Approx(11.317).epsilon(1e-4));
    CHECK(c.c3 == doctest::Approx(15.547).epsilon(1e-4));
    CHECK(c.c4 == doctest::Approx(3.050).epsilon(1e-3));
    CHECK(c.c2 <= kPublishedC2);
    CHECK(c.c3 <= kPublishedC3);
    CHECK(c.c4 <= kPublishedC4);

    const auto lim = subgaussian_constants(1e-9, 1e-9);
    CHECK(lim.c2 == doctest::Approx(2.0));
    CHECK(lim.c3 == doctest::Approx(6.0));
    CHECK(lim.c4 == doctest::Approx(2.0));

    CHECK_THROWS_AS(subgaussian_constants(0.9, 0.3), InfeasibleError);
    CHECK_THROWS_AS(subgaussian_constants(1.0 / 3.0, 0.9), DomainError);

    CHECK(subgaussian_error_bound(11.36, 15.55, 3.07, 0.0, 0.0, 25, 4, 2.0).total == 0.0);
    const auto eq = subgaussian_error_bound(11.36, 15.55, 3.07, 0.0, 2.0, 16, 16, 2.0);
    CHECK(eq.term_noise == doctest::Approx(15.55 * 4.07 * 2.0 / 16.0));
    const auto p1 = subgaussian_error_bound(11.36, 15.55, 3.07, 0.4, 1.0, 25, 25, 1.0);
    CHECK(std::abs(p1.term_noise - 15.55 * 4.07 * 5.0 / 25.0) < 1e-12);
    CHECK(std::abs(p1.term_sparsity - 11.36 * 0.4) < 1e-12);
}

TEST_CASE("sparsity threshold") {
    CHECK(sparsity_threshold_value(20, 760, 1.0) == doctest::Approx(760.0));
    CHECK(sparsity_threshold_value(20, 1520, 1.0) == doctest::Approx(760.0 / std::pow(1.0 + std::log(2.0), 2)));
    CHECK(sparsity_threshold(20, 1520, 1.0) == 265);
    std::size_t prev = sparsity_threshold(20, 1520, 1.0);
    for (double a = 0.9; a > 0.0; a -= 0.1) {
        const std::size_t cur = sparsity_threshold(20, 1520, a);
        CHECK(cur <= prev);
        prev = cur;
    }
    CHECK(sparsity_threshold(20, 1520, 1e-6) == 0);
    CHECK_THROWS_AS(sparsity_threshold(20, 700, 1.0), DomainError);
}

TEST_CASE("hanson_wright_bound") {
    const auto zero = hanson_wright_bound(0.0, 1.0, 1.0, 1.0, 0.1, false);
    CHECK(zero.value == 1.0);
    CHECK(zero.raw == 2.0);
    CHECK(hanson_wright_bound(0.0, 1.0, 1.0, 1.0, 0.1, true).raw == 4.0);
    CHECK(hanson_wright_bound(2.0, 1.0, 2.0, 2.0, 0.3, false).raw == doctest::Approx(2.0 * std::exp(-0.3)));
    for (double t : {0.5, 1.0, 3.0, 10.0}) {
        const auto r = hanson_wright_bound(t, 1.2, 2.0, 1.5, 0.1, false);
        const auto c = hanson_wright_bound(t, 1.2, 2.0, 1.5, 0.1, true);
        CHECK(c.raw >= r.raw);
        CHECK(r.value <= 1.0);
    }
    CHECK_THROWS_AS(hanson_wright_bound(-1.0, 1.0, 1.0, 1.0, 0.1, false), ParameterError);
}

TEST_CASE("fourth-order zeta") {
    for (double psi : {1.0, 1.2}) {
        for (double w : {0.25, 0.5, 1.0}) {
            CHECK(fourth_order_zeta(w, psi, 0.0, 1.0, 64) == doctest::Approx(w * w / std::pow(psi, 4)));
        }
    }
    const auto terms = fourth_order_zeta_terms(1.0, 1.0, 1.0, 1.0, 100);
    const double expected[10] = {1.0, 1.0 / 3.0, 0.25, 1.0, 1.0, 100.0, 1.0, 1.0, 1.0, 100.0};
    for (int i = 0; i < 10; ++i) CHECK(terms[static_cast<std::size_t>(i)] == doctest::Approx(expected[i]));
    CHECK(fourth_order_zeta(1.0, 1.0, 1.0, 1.0, 100) == doctest::Approx(0.25));
    CHECK(fourth_order_zeta(1e-8, 1.0, 0.0, 1.0, 64) < 1e-15);
    CHECK(fourth_order_tail_bound(0.25, 64, 0.01).raw == doctest::Approx(2.0 * std::exp(-0.01 * 0.25 * 64)));
    CHECK_THROWS_AS(fourth_order_zeta(1.0, 0.5, 0.0, 1.0, 64), ParameterError);
}

TEST_CASE("concentration bounds") {
    const auto b = mplus_concentration_bound(0.3, 1.0, 100, 1000, 0.1);
    CHECK(b.failure.raw == doctest::Approx(2000.0 * std::exp(-0.45)));
    CHECK(b.failure.value == 1.0);
    CHECK(b.per_vector.raw == doctest::Approx(2.0 * std::exp(-0.45)));
    CHECK(mplus_concentration_bound(1.0 / 3.0, 1.0, 100, 1000, 0.1).kappa_bound == doctest::Approx(2.0));
    CHECK(mplus_concentration_bound(0.999, 1.0, 100000, 10, 0.1).failure.value < 1e-10);

    CHECK(column_norm_tail_bound(0.5, 1.0, 64, 0.01).raw == doctest::Approx(2.0 * std::exp(-0.01 * 0.25 * 64)));
    CHECK(column_norm_tail_bound(0.0, 1.0, 64, 0.01).raw == 2.0);
    CHECK_THROWS_AS(column_norm_tail_bound(0.5, 2.0, 8, 0.01), PreconditionError);
}

TEST_CASE("rip regime evaluators are monotone") {
    const auto a = rip_regime(0.5, 1.2, 1.0, 20, 1520);
    const auto b = rip_regime(0.25, 1.2, 1.0, 20, 1520);
    CHECK(a.C1 > b.C1);
    CHECK(a.alpha >= b.alpha);
    CHECK(a.max_2s >= b.max_2s);
    CHECK(a.min_n < b.min_n);
    CHECK_THROWS_AS(rip_regime(0.5, 1.2, 1.0, 20, 100), DomainError);

    const auto h1 = heavy_tail_rip_bound(4, 760, 1520, 1.0, 1.0, 1.0, 0.1);
    const auto h2 = heavy_tail_rip_bound(8, 760, 1520, 1.0, 1.0, 1.0, 0.1);
    CHECK(h1.xi == doctest::Approx(2.0));
    CHECK(h2.delta_bound > h1.delta_bound);
}

TEST_CASE("constant chain") {
    const auto chain = constant_chain(1.0 / 3.0, 1.0 / 6.0, 20, 1520);
    CHECK(chain.value("c2") == doctest::Approx(11.317).epsilon(1e-4));
    CHECK(chain.value("sparsity_threshold_2s") == 265.0);
    for (const auto& c : chain.constants) {
        for (const auto& in : c.inputs) CHECK_NOTHROW(chain.value(in));
    }
    CHECK_THROWS_AS(chain.value("nope"), InputError);
    CHECK(constant_chain(1.0 / 3.0, 1.0 / 6.0).constants.size() < chain.constants.size());
}
