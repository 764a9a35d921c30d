#include "nnkr/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nnkr/errors.hpp"

namespace nnkr {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

ProbabilityBound clamp_probability(double raw) {
    return {std::clamp(raw, 0.0, 1.0), raw};
}

// a / b with b == 0 read as +infinity (a > 0 assumed).
double ratio(double a, double b) {
    return b == 0.0 ? kInfinity : a / b;
}

void check_p(double p, double q) {
    if (!(p >= 1.0 && p <= q)) {
        throw DomainError("error bound: p = " + num(p) + " must lie in [1, " + num(q) + "]");
    }
}

}  // namespace

std::string_view to_string(NormTag tag) {
    return tag == NormTag::frobenius ? "frobenius" : "l2-columns";
}

NormTag parse_norm_tag(std::string_view tag) {
    if (tag == "frobenius") return NormTag::frobenius;
    if (tag == "l2-columns") return NormTag::l2_columns;
    throw ParameterError("unknown norm tag '" + std::string(tag) + "' (expected frobenius or l2-columns)");
}

void NspCertificate::validate() const {
    if (!(q >= 1.0)) throw ParameterError("NSP certificate: q must be >= 1");
    if (s < 1) throw ParameterError("NSP certificate: s must be >= 1");
    if (!(rho >= 0.0 && rho < 1.0)) throw ParameterError("NSP certificate: rho must lie in [0, 1)");
    if (!(tau > 0.0)) throw ParameterError("NSP certificate: tau must be positive");
}

NspCertificate rip_to_nsp(double delta, std::size_t s, NormTag tag) {
    if (!(delta > 0.0 && delta < kRipNspLimit)) {
        throw DomainError("rip_to_nsp: delta = " + num(delta) + " must lie in (0, 4/sqrt(41) = " +
                          num(kRipNspLimit) + ")");
    }
    if (s < 1) throw ParameterError("rip_to_nsp: s must be >= 1");
    const double denom = std::sqrt(1.0 - delta * delta) - delta / 4.0;
    NspCertificate cert;
    cert.q = 2.0;
    cert.s = s;
    cert.rho = delta / denom;
    cert.tau = std::sqrt(1.0 + delta) / denom;
    cert.norm_tag = tag;
    return cert;
}

CdConstants cd_constants(double rho) {
    if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("cd_constants: rho = " + num(rho) + " must lie in [0, 1)");
    return {(1.0 + rho) * (1.0 + rho) / (1.0 - rho), (3.0 + rho) / (1.0 - rho)};
}

double condition_number(const RealVector& w) {
    if (w.size() == 0) throw DimensionError("condition_number: empty weight vector");
    if (!w.allFinite() || !(w.minCoeff() > 0.0)) {
        throw ParameterError("condition_number: weights must be finite and strictly positive");
    }
    return w.maxCoeff() / w.minCoeff();
}

NspCertificate weighted_nsp(const NspCertificate& cert, const RealVector& w) {
    cert.validate();
    const double kappa = condition_number(w);
    const double rho = kappa * cert.rho;
    if (!(rho < 1.0)) {
        throw InfeasibleError("weighted_nsp: kappa * rho = " + num(rho) + " >= 1 (kappa = " + num(kappa) +
                              ", rho = " + num(cert.rho) + ")");
    }
    NspCertificate out = cert;
    out.rho = rho;
    out.tau = w.cwiseAbs().maxCoeff() * cert.tau;
    return out;
}

MPlusCertificate mplus_certificate(const MeasurementEnsemble& e, const ComplexMatrix& t) {
    RealVector w = adjoint(e, t);
    if (!(w.minCoeff() > 0.0)) {
        const Eigen::Index bad = [&] {
            Eigen::Index i = 0;
            w.minCoeff(&i);
            return i;
        }();
        throw MPlusViolation("mplus_certificate: A^*(T) has a non-positive entry (w[" + std::to_string(bad) +
                             "] = " + num(w[bad]) + ")");
    }
    MPlusCertificate mp;
    mp.t = t;
    mp.kappa = w.maxCoeff() / w.minCoeff();
    mp.theta = t.norm() / w.maxCoeff();
    mp.w = std::move(w);
    return mp;
}

BoundBreakdown mplus_error_bound(const NspCertificate& cert, double kappa, double theta, double sigma_s,
                                 double e_norm, double p, std::size_t s) {
    cert.validate();
    if (!(kappa >= 1.0)) throw ParameterError("mplus_error_bound: kappa must be >= 1");
    if (!(theta >= 0.0)) throw ParameterError("mplus_error_bound: theta must be >= 0");
    if (!(sigma_s >= 0.0) || !(e_norm >= 0.0)) {
        throw ParameterError("mplus_error_bound: sigma_s and ||E|| must be nonnegative");
    }
    if (s < 1) throw ParameterError("mplus_error_bound: s must be >= 1");
    check_p(p, cert.q);
    const double kr = kappa * cert.rho;
    if (!(kr < 1.0)) throw InfeasibleError("mplus_error_bound: kappa * rho = " + num(kr) + " >= 1");

    const double c_prime = 2.0 * (1.0 + kr) * (1.0 + kr) / (1.0 - kr);
    const double d_prime = 2.0 * (3.0 + kr) / (1.0 - kr);
    const auto sd = static_cast<double>(s);
    BoundBreakdown b;
    b.p = p;
    b.term_sparsity = c_prime * kappa * sigma_s / std::pow(sd, 1.0 - 1.0 / p);
    b.term_noise = d_prime * kappa / std::pow(sd, 1.0 / cert.q - 1.0 / p) *
                   (cert.tau + theta / std::pow(sd, 1.0 - 1.0 / cert.q)) * e_norm;
    b.total = b.term_sparsity + b.term_noise;
    b.constants = {{"C'", c_prime}, {"D'", d_prime}, {"kappa", kappa}, {"rho", cert.rho},
                   {"tau", cert.tau}, {"theta", theta},   {"q", cert.q}};
    return b;
}

BoundBreakdown mplus_error_bound(const NspCertificate& cert, const MPlusCertificate& mp, double sigma_s,
                                 double e_norm, double p, std::size_t s) {
    return mplus_error_bound(cert, mp.kappa, mp.theta, sigma_s, e_norm, p, s);
}

SubgaussianConstants subgaussian_constants(double eta, double delta) {
    if (!(eta > 0.0 && eta < 1.0)) throw DomainError("subgaussian_constants: eta must lie in (0, 1)");
    const NspCertificate cert = rip_to_nsp(delta, 1);
    SubgaussianConstants out;
    out.rho = cert.rho;
    out.tau = cert.tau;
    out.kappa_eta = (1.0 + eta) / (1.0 - eta);
    const double kr = out.kappa_eta * out.rho;
    if (!(kr < 1.0)) {
        throw InfeasibleError("subgaussian_constants: kappa_eta * rho = " + num(out.kappa_eta) + " * " +
                              num(out.rho) + " = " + num(kr) + " >= 1");
    }
    const CdConstants cd = cd_constants(kr);
    out.C = cd.C;
    out.D = cd.D;
    out.c2 = 2.0 * cd.C * out.kappa_eta;
    out.c3 = 2.0 * cd.D * out.kappa_eta / (1.0 + eta);
    out.c4 = 2.0 * out.tau * (1.0 + eta);
    return out;
}

BoundBreakdown subgaussian_error_bound(double c2, double c3, double c4, double sigma_s, double e_frob,
                                       std::size_t n, std::size_t s, double p) {
    check_p(p, 2.0);
    if (s < 1) throw ParameterError("subgaussian_error_bound: s must be >= 1");
    if (n < 2) throw ParameterError("subgaussian_error_bound: n must be >= 2");
    if (!(sigma_s >= 0.0) || !(e_frob >= 0.0)) {
        throw ParameterError("subgaussian_error_bound: sigma_s and ||E||_F must be nonnegative");
    }
    const auto sd = static_cast<double>(s);
    const auto nd = static_cast<double>(n);
    BoundBreakdown b;
    b.p = p;
    b.term_sparsity = c2 * sigma_s / std::pow(sd, 1.0 - 1.0 / p);
    b.term_noise = c3 * (c4 + std::sqrt(nd / sd)) / std::pow(sd, 0.5 - 1.0 / p) * e_frob / nd;
    b.total = b.term_sparsity + b.term_noise;
    b.constants = {{"c2", c2}, {"c3", c3}, {"c4", c4}};
    return b;
}

double sparsity_threshold_value(std::size_t n, std::size_t count, double alpha) {
    if (n < 2) throw DimensionError("sparsity_threshold: n must be >= 2");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("sparsity_threshold: alpha must lie in (0, 1]");
    const std::size_t m = offdiag_dim(n);
    if (count < m) {
        throw DomainError("sparsity_threshold: N = " + std::to_string(count) + " < m = " + std::to_string(m));
    }
    const double am = alpha * static_cast<double>(m);
    const double lg = std::log(std::exp(1.0) * static_cast<double>(count) / am);
    return am / (lg * lg);
}

std::size_t sparsity_threshold(std::size_t n, std::size_t count, double alpha) {
    // The guard keeps N = m exact despite rounding in the logarithm.
    return static_cast<std::size_t>(std::floor(sparsity_threshold_value(n, count, alpha) * (1.0 + 1e-12)));
}

ProbabilityBound hanson_wright_bound(double t, double k, double frob, double op, double c, bool complex_case) {
    if (!(t >= 0.0)) throw ParameterError("hanson_wright_bound: t must be >= 0");
    if (!(k > 0.0 && frob > 0.0 && op > 0.0 && c > 0.0)) {
        throw ParameterError("hanson_wright_bound: K, ||Z||_F, ||Z||_op and c must be positive");
    }
    const double k2 = k * k;
    const double k4 = k2 * k2;
    double expo = 0.0;
    double lead = 0.0;
    if (complex_case) {
        expo = std::min(t * t / (4.0 * k4 * frob * frob), t / (std::sqrt(2.0) * k2 * op));
        lead = 4.0;
    } else {
        expo = std::min(t * t / (k4 * frob * frob), t / (k2 * op));
        lead = 2.0;
    }
    return clamp_probability(lead * std::exp(-c * expo));
}

std::array<double, 10> fourth_order_zeta_terms(double omega, double l, double mu, double sigma2, std::size_t n) {
    const double w = omega;
    const double nd = static_cast<double>(n);
    const double l2 = l * l;
    const double l3 = l2 * l;
    const double l4 = l2 * l2;
    const double mu2 = mu * mu;
    return {
        ratio(w * w, l2 * mu2 * sigma2 * sigma2),
        ratio(w, l2 * (sigma2 + 2.0 * mu2)),
        ratio(w * w, l4 * (sigma2 + mu2) * (sigma2 + mu2)),
        ratio(std::cbrt(w * w), l2 * std::cbrt(mu2)),
        ratio(w, l3 * mu),
        ratio(w * w * nd, l4 * l2 * mu2),
        std::sqrt(w) / l2,
        std::cbrt(w * w) / std::pow(l, 8.0 / 3.0),
        w / l4,
        w * w * nd / (l4 * l4),
    };
}

double fourth_order_zeta(double omega, double l, double mu, double sigma2, std::size_t n) {
    if (!(l >= 1.0)) throw ParameterError("fourth_order_zeta: L must be >= 1");
    if (!(omega > 0.0)) throw ParameterError("fourth_order_zeta: omega must be positive");
    if (!(mu >= 0.0) || !(sigma2 >= 0.0)) throw ParameterError("fourth_order_zeta: mu and sigma2 must be >= 0");
    if (n < 2) throw ParameterError("fourth_order_zeta: n must be >= 2");
    const auto terms = fourth_order_zeta_terms(omega, l, mu, sigma2, n);
    return *std::min_element(terms.begin(), terms.end());
}

ProbabilityBound fourth_order_tail_bound(double zeta, std::size_t n, double gamma) {
    if (!(zeta >= 0.0)) throw ParameterError("fourth_order_tail_bound: zeta must be >= 0");
    if (!(gamma > 0.0)) throw ParameterError("fourth_order_tail_bound: gamma must be positive");
    return clamp_probability(2.0 * std::exp(-gamma * zeta * static_cast<double>(n)));
}

MPlusConcentration mplus_concentration_bound(double eta, double psi2, std::size_t n, std::size_t count,
                                             double c) {
    if (!(eta > 0.0 && eta < 1.0)) throw ParameterError("mplus_concentration_bound: eta must lie in (0, 1)");
    if (!(psi2 >= 1.0)) throw ParameterError("mplus_concentration_bound: psi2 must be >= 1");
    if (!(c > 0.0)) throw ParameterError("mplus_concentration_bound: c must be positive");
    const double psi4 = std::pow(psi2, 4.0);
    const double single = std::exp(-c * eta * eta * static_cast<double>(n) / (2.0 * psi4));
    MPlusConcentration out;
    out.per_vector = clamp_probability(2.0 * single);
    out.failure = clamp_probability(2.0 * static_cast<double>(count) * single);
    out.kappa_bound = (1.0 + eta) / (1.0 - eta);
    return out;
}

ProbabilityBound column_norm_tail_bound(double omega, double psi2, std::size_t n, double gamma) {
    if (!(psi2 >= 1.0)) throw ParameterError("column_norm_tail_bound: psi2 must be >= 1");
    if (!(omega >= 0.0)) throw ParameterError("column_norm_tail_bound: omega must be >= 0");
    if (!(gamma > 0.0)) throw ParameterError("column_norm_tail_bound: gamma must be positive");
    if (static_cast<double>(n) < std::pow(psi2, 4.0)) {
        throw PreconditionError("column_norm_tail_bound: requires n >= psi2^4 (n = " + std::to_string(n) +
                                ", psi2^4 = " + num(std::pow(psi2, 4.0)) + ")");
    }
    if (omega == 0.0) return clamp_probability(2.0);
    return fourth_order_tail_bound(fourth_order_zeta(omega, psi2, 0.0, 1.0, n), n, gamma);
}

HeavyTailRip heavy_tail_rip_bound(std::size_t s, std::size_t m, std::size_t count, double psi, double k,
                                  double k_prime, double theta, const UniversalConstants& uc) {
    if (s < 1 || s > std::min(count, m)) throw ParameterError("heavy_tail_rip_bound: need 1 <= s <= min(N, m)");
    if (!(theta > 0.0 && theta < 1.0)) throw ParameterError("heavy_tail_rip_bound: theta must lie in (0, 1)");
    if (!(k >= 1.0 && k_prime >= 1.0)) throw ParameterError("heavy_tail_rip_bound: K and K' must be >= 1");
    if (!(psi > 0.0)) throw ParameterError("heavy_tail_rip_bound: psi must be positive");
    const auto sd = static_cast<double>(s);
    const double root = std::sqrt(sd / static_cast<double>(m));
    const double lg = std::log(std::exp(1.0) * static_cast<double>(count) / (sd * root));
    HeavyTailRip out;
    out.xi = psi * k + k_prime;
    out.delta_bound = uc.rip_C * out.xi * out.xi * root * lg + theta;
    out.first_term = clamp_probability(std::exp(-uc.rip_c_hat * k * std::sqrt(sd) * lg));
    return out;
}

RipRegime rip_regime(double delta, double psi2, double psi1, std::size_t n, std::size_t count,
                     const UniversalConstants& uc) {
    if (!(delta > 0.0 && delta <= 1.0)) throw ParameterError("rip_regime: delta must lie in (0, 1]");
    if (!(psi2 >= 1.0)) throw ParameterError("rip_regime: psi2 must be >= 1");
    if (!(psi1 > 0.0)) throw ParameterError("rip_regime: psi1 must be positive");
    RipRegime out;
    out.C1 = uc.tail_gamma * delta * delta / (4.0 * std::pow(psi2, 4.0));
    const double root = psi1 + std::sqrt(1.0 + delta / 2.0);
    const double a = delta / (6.0 * uc.rip_C * root * root);
    out.alpha = std::min(1.0, a * a);
    out.min_n = 2.0 * std::log(4.0 * static_cast<double>(count)) / out.C1;
    out.failure = clamp_probability(
        2.0 * std::exp(-std::min(uc.rip_c_hat * std::sqrt(out.alpha), 0.5 * out.C1) * static_cast<double>(n)));
    out.max_2s = sparsity_threshold(n, count, out.alpha);
    return out;
}

double ConstantChain::value(std::string_view name) const {
    for (const auto& c : constants) {
        if (c.name == name) return c.value;
    }
    throw InputError("constant chain has no entry '" + std::string(name) + "'");
}

ConstantChain constant_chain(double eta, double delta, std::size_t n, std::size_t count, double alpha) {
    const SubgaussianConstants sc = subgaussian_constants(eta, delta);
    const CdConstants plain = cd_constants(sc.rho);
    ConstantChain chain;
    chain.eta = eta;
    chain.delta = delta;
    auto add = [&](std::string name, double value, std::string formula, std::vector<std::string> inputs) {
        chain.constants.push_back({std::move(name), value, std::move(formula), std::move(inputs)});
    };
    add("delta", delta, "input: RIP level of order 2s", {});
    add("eta", eta, "input: norm concentration level", {});
    add("rho", sc.rho, "delta / (sqrt(1 - delta^2) - delta/4)", {"delta"});
    add("tau", sc.tau, "sqrt(1 + delta) / (sqrt(1 - delta^2) - delta/4)", {"delta"});
    add("C(rho)", plain.C, "(1 + rho)^2 / (1 - rho)", {"rho"});
    add("D(rho)", plain.D, "(3 + rho) / (1 - rho)", {"rho"});
    add("kappa_eta", sc.kappa_eta, "(1 + eta) / (1 - eta)", {"eta"});
    add("kappa_eta*rho", sc.kappa_eta * sc.rho, "kappa_eta * rho (must be < 1)", {"kappa_eta", "rho"});
    add("C(kappa_eta*rho)", sc.C, "(1 + x)^2 / (1 - x) at x = kappa_eta * rho", {"kappa_eta*rho"});
    add("D(kappa_eta*rho)", sc.D, "(3 + x) / (1 - x) at x = kappa_eta * rho", {"kappa_eta*rho"});
    add("c2", sc.c2, "2 C(kappa_eta rho) kappa_eta", {"C(kappa_eta*rho)", "kappa_eta"});
    add("c3", sc.c3, "2 D(kappa_eta rho) kappa_eta / (1 + eta)", {"D(kappa_eta*rho)", "kappa_eta", "eta"});
    add("c4", sc.c4, "2 tau (1 + eta)", {"tau", "eta"});
    add("D_eta_rho", 2.0 * sc.D * sc.kappa_eta, "2 D(kappa_eta rho) kappa_eta", {"D(kappa_eta*rho)", "kappa_eta"});
    if (n >= 2 && count >= offdiag_dim(n)) {
        add("m", static_cast<double>(offdiag_dim(n)), "2 n (n - 1)", {});
        add("alpha", alpha, "input: sparsity threshold scale", {});
        add("sparsity_threshold_2s", static_cast<double>(sparsity_threshold(n, count, alpha)),
            "floor(alpha m / log^2(e N / (alpha m)))", {"alpha", "m"});
    }
    const auto published = [&](const char* name, double exact, double printed) {
        std::ostringstream os;
        os.precision(6);
        os << name << " = " << exact << (exact <= printed ? " <= " : " > ") << printed
           << " (published, rounded up)";
        chain.notes.push_back(os.str());
    };
    if (std::abs(eta - 1.0 / 3.0) < 1e-12 && std::abs(delta - 1.0 / 6.0) < 1e-12) {
        published("c2", sc.c2, kPublishedC2);
        published("c3", sc.c3, kPublishedC3);
        published("c4", sc.c4, kPublishedC4);
    }
    return chain;
}

}  // namespace nnkr
