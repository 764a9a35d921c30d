#include <doctest.h>

#include <cmath>

#include "nnkr/diagnostics.hpp"
#include "nnkr/errors.hpp"
#include "nnkr/rng.hpp"

using namespace nnkr;

namespace {

RealMatrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    Engine g = make_engine(seed, {0});
    std::normal_distribution<double> d(0.0, 1.0 / std::sqrt(static_cast<double>(rows)));
    RealMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = d(g);
    return m;
}

// Closed-form extreme eigenvalues of every 2x2 Gram block.
double pair_oracle(const RealMatrix& phi) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < phi.cols(); ++i) {
        for (Eigen::Index j = i + 1; j < phi.cols(); ++j) {
            const double a = phi.col(i).squaredNorm(), c = phi.col(j).squaredNorm(), b = phi.col(i).dot(phi.col(j));
            const double mid = 0.5 * (a + c), rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
            worst = std::max({worst, std::abs(mid + rad - 1.0), std::abs(mid - rad - 1.0)});
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("binomial") {
    CHECK(binomial(12, 2) == 66);
    CHECK(binomial(5, 0) == 1);
    CHECK(binomial(3, 5) == 0);
    CHECK(binomial(1000, 500) == std::numeric_limits<std::uint64_t>::max());
}

TEST_CASE("rip_exhaustive") {
    CHECK(rip_exhaustive(RealMatrix::Identity(6, 4), 3).delta < 1e-15);

    RealMatrix dup = RealMatrix::Zero(3, 2);
    dup(0, 0) = 1.0;
    dup(0, 1) = 1.0;
    CHECK(rip_exhaustive(dup, 2).delta == doctest::Approx(1.0));

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const RealMatrix phi = gaussian_matrix(8, 12, seed);
        const auto two = rip_exhaustive(phi, 2);
        CHECK(two.method == RipMethod::exhaustive);
        CHECK(two.supports_checked == 66);
        CHECK_FALSE(two.lower_bound);
        CHECK(std::abs(two.delta - pair_oracle(phi)) < 1e-10);
        CHECK(rip_exhaustive(phi, 2, 3).delta == two.delta);
        CHECK(rip_exhaustive(phi, 3).delta >= two.delta);
        CHECK(rip_exhaustive(phi, 1).delta <= two.delta);

        const auto sampled = rip_sampled(phi, 3, 50, seed);
        CHECK(sampled.lower_bound);
        CHECK(sampled.delta <= rip_exhaustive(phi, 3).delta + 1e-15);
    }
    CHECK_THROWS_AS(rip_exhaustive(gaussian_matrix(40, 60, 1), 20), GuardExceeded);
    CHECK_THROWS_AS(rip_exhaustive(gaussian_matrix(4, 6, 1), 7), ParameterError);
}

TEST_CASE("nsp_sampled_check") {
    const auto law = SubgaussianLaw::standard(LawKind::complex_gaussian);
    const auto e = MeasurementEnsemble::sample(3, 20, law, 1);
    NspCertificate vacuous;
    vacuous.rho = 1.0 - 1e-9;
    vacuous.tau = 1e12;
    CHECK(nsp_sampled_check(e, vacuous, 300, 2).violations == 0);

    // a_0 = a_1 makes e_0 - e_1 a nullspace vector concentrated on one entry.
    Eigen::MatrixXcd v = MeasurementEnsemble::sample(3, 4, law, 3).vectors();
    v.col(1) = v.col(0);
    const auto dup = MeasurementEnsemble::from_vectors(v);
    NspCertificate cert;
    cert.rho = 0.5;
    cert.tau = 1.0;
    cert.norm_tag = NormTag::frobenius;
    const auto rep = nsp_sampled_check(dup, cert, 40, 4);
    CHECK(rep.violations > 0);
    CHECK(rep.worst_ratio > 1.0);

    // Unit-norm columns (unimodular entries) keep delta_2 small.
    const auto rad = MeasurementEnsemble::sample(6, 8, SubgaussianLaw::standard(LawKind::complex_rademacher), 5);
    const auto est = rip_exhaustive(build_phi(rad), 2);
    REQUIRE(est.delta < kRipNspLimit);
    const auto certified = rip_to_nsp(est.delta, 1);
    const auto ok = nsp_sampled_check(rad, certified, 20000, 6);
    CHECK(ok.violations == 0);
    CHECK(ok.checks >= 20000);

    CHECK_THROWS_AS(nsp_sampled_check(e, vacuous, 0, 1), ParameterError);
}

TEST_CASE("norm concentration") {
    const auto rad = norm_concentration_check(SubgaussianLaw::standard(LawKind::complex_rademacher), 8, 10,
                                              {0.1, 0.5}, 500, 1);
    CHECK(rad.empirical_exceedance[0] == 0.0);
    CHECK(rad.empirical_exceedance[1] == 0.0);

    const auto law = SubgaussianLaw::standard(LawKind::complex_gaussian);
    const auto zero = norm_concentration_check(law, 8, 10, {0.0}, 500, 2);
    CHECK(zero.empirical_exceedance[0] == 1.0);

    const auto g = norm_concentration_check(law, 64, 10, {0.5}, 10000, 3);
    CHECK(g.crossings().empty());
    CHECK(g.empirical_exceedance[0] <= g.analytic_bound[0]);
    CHECK(std::abs(g.sample_mean - g.expected_mean) <= 4.0 * g.standard_error);

    CHECK_THROWS_AS(norm_concentration_check(law, 8, 10, {0.5}, 50, 1), PreconditionError);
    CHECK_THROWS_AS(norm_concentration_check(law, 8, 10, {1.0}, 500, 1), ParameterError);
}

TEST_CASE("fourth_order_poly") {
    RealVector one = RealVector::Zero(6);
    one(0) = 1.0;
    CHECK(fourth_order_poly(one) == 0.0);

    ComplexVector a(2);
    a << Complex(1, 1), Complex(1, 1);
    RealVector stacked(4);
    stacked << 1, 1, 1, 1;
    CHECK(fourth_order_poly(stacked) == doctest::Approx(p_vectorize_outer(a).squaredNorm()));
    // |a_k|^2 = 2 for both entries: 2 * (2 ordered pairs) * 4.
    CHECK(fourth_order_poly(stacked) == 16.0);

    Engine g = make_engine(7, {0});
    std::normal_distribution<double> d;
    for (int t = 0; t < 200; ++t) {
        const int n = 2 + t % 5;
        RealVector v(2 * n);
        for (int i = 0; i < 2 * n; ++i) v(i) = d(g);
        const ComplexVector c = v.head(n).cast<Complex>() + Complex(0, 1) * v.tail(n).cast<Complex>();
        const double ref = p_vectorize_outer(c).squaredNorm();
        CHECK(std::abs(fourth_order_poly(v) - ref) <= 1e-10 * ref);
    }
    CHECK_THROWS_AS(fourth_order_poly(RealVector::Zero(5)), DimensionError);
    CHECK_THROWS_AS(fourth_order_poly(RealVector::Zero(2)), DimensionError);
}

TEST_CASE("fourth-order tail") {
    const auto law = SubgaussianLaw::standard(LawKind::complex_gaussian);
    const auto big = fourth_order_tail_check(law, 16, {10.0, 20.0}, 2000, 1);
    CHECK(big.empirical_exceedance[0] == 0.0);

    const auto r = fourth_order_tail_check(law, 64, {0.5}, 10000, 2);
    CHECK(r.crossings().empty());
    CHECK(r.expected_mean == 2.0 * 64 * 63);
    CHECK(std::abs(r.sample_mean - r.expected_mean) <= 3.0 * r.standard_error);

    const auto loose = law.with_psi2_bound(3.0);
    CHECK_THROWS_AS(fourth_order_tail_check(loose, 16, {0.5}, 200, 1), PreconditionError);
}

TEST_CASE("psi_r_estimate") {
    CHECK(psi_r_estimate(std::vector<double>(2000, 1.0), 2.0, 10) == doctest::Approx(1.0));

    Engine g = make_engine(9, {0});
    std::normal_distribution<double> d;
    std::vector<double> xs(10000);
    for (auto& x : xs) x = d(g);
    const double est = psi_r_estimate(xs, 2.0, 20);
    CHECK(est >= 0.5);
    CHECK(est <= 1.2);

    std::vector<double> scaled = xs;
    for (auto& x : scaled) x *= 3.7;
    CHECK(std::abs(psi_r_estimate(scaled, 2.0, 20) - 3.7 * est) <= 1e-10 * 3.7 * est);
    CHECK(psi_r_estimate(xs, 1.0, 20) > 0.0);
    // p^(-1/r) grows with r, so the estimate cannot fall as r grows.
    CHECK(psi_r_estimate(xs, 1.0, 20) <= psi_r_estimate(xs, 2.0, 20));
    CHECK(psi_r_estimate(xs, 2.0, 20) <= psi_r_estimate(xs, 4.0, 20));

    CHECK_THROWS_AS(psi_r_estimate({}, 2.0, 10), InputError);
    CHECK_THROWS_AS(psi_r_estimate(std::vector<double>(10, 1.0), 2.0, 10), PreconditionError);
    CHECK_THROWS_AS(psi_r_estimate(xs, 0.5, 10), ParameterError);
    xs[3] = std::nan("");
    CHECK_THROWS_AS(psi_r_estimate(xs, 2.0, 10), InputError);
}

TEST_CASE("calibration") {
    const auto law = SubgaussianLaw::standard(LawKind::complex_gaussian);
    const auto cal = calibrate_constants(law, {16}, {0.25, 0.5}, {0.25, 0.5}, 2000, 3);
    CHECK(cal.c_max > 0.0);
    CHECK(cal.gamma_max > 0.0);
    CHECK(cal.reports.size() == 2);
}
