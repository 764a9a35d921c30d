#include "nnkr/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "nnkr/errors.hpp"
#include "nnkr/parallel.hpp"
#include "nnkr/rng.hpp"
#include "nnkr/solver.hpp"

namespace nnkr {

namespace {

using Eigen::Index;

double support_distortion(const RealMatrix& gram, const std::vector<Index>& support) {
    const auto k = static_cast<Index>(support.size());
    RealMatrix sub(k, k);
    for (Index i = 0; i < k; ++i) {
        for (Index j = 0; j < k; ++j) sub(i, j) = gram(support[static_cast<std::size_t>(i)], support[static_cast<std::size_t>(j)]);
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(sub, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::max(ev.maxCoeff() - 1.0, 1.0 - ev.minCoeff());
}

// Advances a sorted k-subset of [0, n) to its lexicographic successor.
bool next_combination(std::vector<Index>& c, Index n) {
    const auto k = static_cast<Index>(c.size());
    Index i = k - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return false;
    ++c[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
    return true;
}

std::vector<Index> random_subset(Index n, Index k, Engine& engine) {
    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Index{0});
    for (Index i = 0; i < k; ++i) {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(engine))]);
    }
    all.resize(static_cast<std::size_t>(k));
    std::sort(all.begin(), all.end());
    return all;
}

void check_samples(std::size_t samples, const char* who) {
    if (samples < 100) throw PreconditionError(std::string(who) + ": at least 100 samples are required");
}

double mean_of(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double standard_error(const std::vector<double>& xs, double mean) {
    double ss = 0.0;
    for (const double x : xs) ss += (x - mean) * (x - mean);
    const auto n = static_cast<double>(xs.size());
    return std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

std::string_view to_string(RipMethod method) {
    return method == RipMethod::exhaustive ? "exhaustive" : "sampled";
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const std::uint64_t num = n - k + i;
        // r * num / i stays exact because r * num is divisible by i.
        if (r > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
        r = r * num / i;
    }
    return r;
}

RipEstimate rip_exhaustive(const RealMatrix& phi, std::size_t s, std::size_t workers) {
    const auto cols = static_cast<std::size_t>(phi.cols());
    const auto rows = static_cast<std::size_t>(phi.rows());
    if (s == 0 || s > std::min(rows, cols)) {
        throw ParameterError("rip_exhaustive: s must lie in [1, min(rows, cols)]");
    }
    const std::uint64_t total = binomial(cols, s);
    if (total > kRipSupportGuard) {
        throw GuardExceeded("rip_exhaustive: C(" + std::to_string(cols) + ", " + std::to_string(s) + ") = " +
                            std::to_string(total) + " supports exceed the guard of " +
                            std::to_string(kRipSupportGuard) + "; use the sampled method");
    }
    const RealMatrix gram = phi.transpose() * phi;
    workers = std::max<std::size_t>(1, std::min<std::size_t>(workers, total));
    std::vector<double> worst(workers, 0.0);
    parallel_for(workers, workers, [&](std::size_t w) {
        std::vector<Index> c(s);
        std::iota(c.begin(), c.end(), Index{0});
        std::uint64_t rank = 0;
        do {
            if (rank % workers == w) worst[w] = std::max(worst[w], support_distortion(gram, c));
            ++rank;
        } while (next_combination(c, static_cast<Index>(cols)));
    });
    RipEstimate est;
    est.s = s;
    est.delta = std::max(0.0, *std::max_element(worst.begin(), worst.end()));
    est.method = RipMethod::exhaustive;
    est.supports_checked = total;
    return est;
}

RipEstimate rip_sampled(const RealMatrix& phi, std::size_t s, std::size_t supports, std::uint64_t seed) {
    const auto cols = static_cast<std::size_t>(phi.cols());
    const auto rows = static_cast<std::size_t>(phi.rows());
    if (s == 0 || s > std::min(rows, cols)) throw ParameterError("rip_sampled: s must lie in [1, min(rows, cols)]");
    if (supports == 0) throw ParameterError("rip_sampled: supports must be >= 1");
    RipEstimate est;
    est.s = s;
    est.method = RipMethod::sampled;
    est.lower_bound = true;
    est.supports_checked = supports;
    for (std::size_t t = 0; t < supports; ++t) {
        Engine engine = make_engine(seed, {stream::kSupports, t});
        const auto support = random_subset(static_cast<Index>(cols), static_cast<Index>(s), engine);
        RealMatrix sub(phi.rows(), static_cast<Index>(s));
        for (Index j = 0; j < static_cast<Index>(s); ++j) sub.col(j) = phi.col(support[static_cast<std::size_t>(j)]);
        const RealMatrix gram = sub.transpose() * sub;
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(gram, Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();
        est.delta = std::max(est.delta, std::max(ev.maxCoeff() - 1.0, 1.0 - ev.minCoeff()));
    }
    return est;
}

NspCheckReport nsp_sampled_check(const MeasurementEnsemble& e, const NspCertificate& cert, std::size_t trials,
                                 std::uint64_t seed) {
    if (trials == 0) throw ParameterError("nsp_sampled_check: trials must be >= 1");
    cert.validate();
    const RealMatrix design = cert.norm_tag == NormTag::frobenius ? hermitian_design(e) : build_phi(e);
    const Index count = design.cols();
    const auto s = static_cast<Index>(std::min<std::size_t>(cert.s, static_cast<std::size_t>(count)));
    const double sd = static_cast<double>(cert.s);
    const double off_weight = cert.rho / std::pow(sd, 1.0 - 1.0 / cert.q);
    const Index max_cols = std::min<Index>({count, design.rows() + 1, 128});
    const Index min_cols = std::min<Index>(count, s + 1);

    NspCheckReport report;
    report.trials = trials;
    static const char* kinds[] = {"gaussian", "sparse-plus-dense", "near-nullspace"};
    for (const char* k : kinds) report.violations_by_kind[k] = 0;

    auto check = [&](const RealVector& v, const std::vector<Index>& support, const char* kind) {
        RealVector on = RealVector::Zero(s);
        double off = v.cwiseAbs().sum();
        for (Index j = 0; j < s; ++j) {
            const double x = v[support[static_cast<std::size_t>(j)]];
            on[j] = x;
            off -= std::abs(x);
        }
        off = std::max(0.0, off);
        const double lhs = lp_norm(on, cert.q);
        const double rhs = off_weight * off + cert.tau * (design * v).norm();
        ++report.checks;
        const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? kInfinity : 0.0);
        report.worst_ratio = std::max(report.worst_ratio, ratio);
        if (lhs > rhs * (1.0 + 1e-9)) {
            ++report.violations;
            ++report.violations_by_kind[kind];
        }
    };

    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t t = 0; t < trials; ++t) {
        Engine engine = make_engine(seed, {stream::kNsp, t});
        const char* kind = kinds[t % 3];
        RealVector v = RealVector::Zero(count);
        if (t % 3 == 0) {
            for (Index i = 0; i < count; ++i) v[i] = normal(engine);
        } else if (t % 3 == 1) {
            for (Index i = 0; i < count; ++i) v[i] = 0.01 * normal(engine);
            for (const Index i : random_subset(count, s, engine)) v[i] += 3.0 * normal(engine);
        } else {
            // Every fourth near-nullspace draw uses the full column set.
            Index r = count;
            if ((t / 3) % 4 != 0 || count > max_cols) {
                std::uniform_int_distribution<Index> width(std::min(min_cols, max_cols), max_cols);
                r = width(engine);
            }
            const auto cols = random_subset(count, r, engine);
            RealMatrix sub(design.rows(), r);
            for (Index j = 0; j < r; ++j) sub.col(j) = design.col(cols[static_cast<std::size_t>(j)]);
            Eigen::BDCSVD<RealMatrix> svd(sub, Eigen::ComputeFullV);
            const RealVector null = svd.matrixV().col(r - 1);
            for (Index j = 0; j < r; ++j) v[cols[static_cast<std::size_t>(j)]] = null[j];
        }
        check(v, random_subset(count, s, engine), kind);
        std::vector<Index> order(static_cast<std::size_t>(count));
        std::iota(order.begin(), order.end(), Index{0});
        std::partial_sort(order.begin(), order.begin() + s, order.end(),
                          [&](Index a, Index b) { return std::abs(v[a]) > std::abs(v[b]); });
        order.resize(static_cast<std::size_t>(s));
        check(v, order, kind);
    }
    return report;
}

std::vector<std::size_t> TailCheckReport::crossings() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < empirical_exceedance.size(); ++i) {
        if (empirical_exceedance[i] > analytic_bound[i]) out.push_back(i);
    }
    return out;
}

TailCheckReport norm_concentration_check(const SubgaussianLaw& law, std::size_t n, std::size_t count,
                                         const std::vector<double>& etas, std::size_t samples,
                                         std::uint64_t seed, double c) {
    check_samples(samples, "norm_concentration_check");
    if (n < 1) throw DimensionError("norm_concentration_check: n must be >= 1");
    if (!(c > 0.0)) throw ParameterError("norm_concentration_check: c must be positive");
    for (const double eta : etas) {
        if (!(eta >= 0.0 && eta < 1.0)) throw ParameterError("norm_concentration_check: eta must lie in [0, 1)");
    }
    std::vector<double> norms(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        Engine engine = make_engine(seed, {stream::kTail, 0, i});
        norms[i] = sample_vector(law, n, engine).squaredNorm();
    }
    const auto nd = static_cast<double>(n);
    const double psi4 = std::pow(law.psi2_bound, 4.0);
    TailCheckReport rep;
    rep.kind = "norm-concentration";
    rep.law = std::string(to_string(law.kind));
    rep.samples = samples;
    rep.thresholds = etas;
    for (const double eta : etas) {
        std::size_t hits = 0;
        for (const double x : norms) hits += std::abs(x - nd) > eta * nd ? 1 : 0;
        rep.empirical_exceedance.push_back(static_cast<double>(hits) / static_cast<double>(samples));
        const double raw = 2.0 * std::exp(-c * eta * eta * nd / (2.0 * psi4));
        rep.analytic_bound_raw.push_back(raw);
        rep.analytic_bound.push_back(std::min(1.0, raw));
    }
    rep.parameters = {{"n", nd},
                      {"N", static_cast<double>(count)},
                      {"c", c},
                      {"psi2", law.psi2_bound},
                      {"seed", static_cast<double>(seed)}};
    for (std::size_t i = 0; i < etas.size(); ++i) {
        rep.parameters["union_bound_eta_" + std::to_string(i)] =
            std::min(1.0, static_cast<double>(count) * rep.analytic_bound_raw[i]);
    }
    rep.sample_mean = mean_of(norms);
    rep.standard_error = standard_error(norms, rep.sample_mean);
    rep.expected_mean = nd;
    return rep;
}

double fourth_order_poly(const RealVector& v) {
    const Index dim = v.size();
    if (dim % 2 != 0 || dim < 4) throw DimensionError("fourth_order_poly: dimension must be even and >= 4");
    const Index n = dim / 2;
    double f = 0.0;
    for (Index k = 0; k < dim; ++k) {
        const double vk = v[k] * v[k];
        for (Index l = 0; l < dim; ++l) {
            if (k == l || k == n + l || l == n + k) continue;
            f += vk * v[l] * v[l];
        }
    }
    // The sum over I is sum_{k != l} |a_k|^2 |a_l|^2; P doubles it.
    return 2.0 * f;
}

TailCheckReport fourth_order_tail_check(const SubgaussianLaw& law, std::size_t n,
                                        const std::vector<double>& omegas, std::size_t samples,
                                        std::uint64_t seed, double gamma) {
    check_samples(samples, "fourth_order_tail_check");
    if (n < 2) throw DimensionError("fourth_order_tail_check: n must be >= 2");
    const double psi4 = std::pow(law.psi2_bound, 4.0);
    if (static_cast<double>(n) < psi4) {
        throw PreconditionError("fourth_order_tail_check: requires n >= psi2^4 (n = " + std::to_string(n) +
                                ", psi2^4 = " + std::to_string(psi4) + ")");
    }
    for (const double w : omegas) {
        if (!(w >= 0.0)) throw ParameterError("fourth_order_tail_check: omega must be >= 0");
    }
    const auto nn = static_cast<Index>(n);
    std::vector<double> values(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        Engine engine = make_engine(seed, {stream::kTail, 1, i});
        const ComplexVector a = sample_vector(law, n, engine);
        RealVector v(2 * nn);
        v.head(nn) = a.real();
        v.tail(nn) = a.imag();
        // ||P(a a^*)||_2^2 = 2 f(Re a, Im a).
        values[i] = fourth_order_poly(v);
    }
    const auto m = static_cast<double>(offdiag_dim(n));
    TailCheckReport rep;
    rep.kind = "fourth-order-tail";
    rep.law = std::string(to_string(law.kind));
    rep.samples = samples;
    rep.thresholds = omegas;
    for (const double w : omegas) {
        std::size_t hits = 0;
        for (const double f : values) hits += std::abs(f - m) >= m * w ? 1 : 0;
        rep.empirical_exceedance.push_back(static_cast<double>(hits) / static_cast<double>(samples));
        const ProbabilityBound b = column_norm_tail_bound(w, law.psi2_bound, n, gamma);
        rep.analytic_bound.push_back(b.value);
        rep.analytic_bound_raw.push_back(b.raw);
    }
    rep.parameters = {{"n", static_cast<double>(n)},
                      {"m", m},
                      {"gamma", gamma},
                      {"psi2", law.psi2_bound},
                      {"seed", static_cast<double>(seed)}};
    rep.sample_mean = mean_of(values);
    rep.standard_error = standard_error(values, rep.sample_mean);
    rep.expected_mean = m;
    return rep;
}

double psi_r_estimate(const std::vector<double>& samples, double r, std::size_t p_max) {
    if (samples.empty()) throw InputError("psi_r_estimate: no samples");
    if (samples.size() < 1000) throw PreconditionError("psi_r_estimate: at least 1000 samples are required");
    if (!(r >= 1.0)) throw ParameterError("psi_r_estimate: r must be >= 1");
    if (p_max < 2) throw ParameterError("psi_r_estimate: p_max must be >= 2");
    double scale = 0.0;
    for (const double x : samples) {
        if (!std::isfinite(x)) throw InputError("psi_r_estimate: non-finite sample");
        scale = std::max(scale, std::abs(x));
    }
    if (scale == 0.0) return 0.0;
    // Moments of |X| / max|X| stay in [0, 1] for every p.
    double best = 0.0;
    const auto count = static_cast<double>(samples.size());
    for (std::size_t p = 1; p <= p_max; ++p) {
        const auto pd = static_cast<double>(p);
        double acc = 0.0;
        for (const double x : samples) acc += std::pow(std::abs(x) / scale, pd);
        const double moment = std::pow(acc / count, 1.0 / pd);
        best = std::max(best, std::pow(pd, -1.0 / r) * moment);
    }
    return best * scale;
}

Calibration calibrate_constants(const SubgaussianLaw& law, const std::vector<std::size_t>& ns,
                                const std::vector<double>& etas, const std::vector<double>& omegas,
                                std::size_t samples, std::uint64_t seed) {
    Calibration cal;
    const double psi4 = std::pow(law.psi2_bound, 4.0);
    for (const std::size_t n : ns) {
        const auto nd = static_cast<double>(n);
        auto norm = norm_concentration_check(law, n, n, etas, samples, derive_seed(seed, {n, 0}));
        for (std::size_t i = 0; i < etas.size(); ++i) {
            const double rate = norm.empirical_exceedance[i];
            const double eta = etas[i];
            if (rate <= 0.0 || eta <= 0.0) continue;
            // 2 exp(-c eta^2 n / (2 psi^4)) >= rate
            cal.c_max = std::min(cal.c_max, -2.0 * psi4 * std::log(rate / 2.0) / (eta * eta * nd));
        }
        auto tail = fourth_order_tail_check(law, n, omegas, samples, derive_seed(seed, {n, 1}));
        for (std::size_t i = 0; i < omegas.size(); ++i) {
            const double rate = tail.empirical_exceedance[i];
            const double w = omegas[i];
            if (rate <= 0.0 || w <= 0.0) continue;
            const double zeta = fourth_order_zeta(w, law.psi2_bound, 0.0, 1.0, n);
            cal.gamma_max = std::min(cal.gamma_max, -std::log(rate / 2.0) / (zeta * nd));
        }
        cal.reports.push_back(std::move(norm));
        cal.reports.push_back(std::move(tail));
    }
    return cal;
}

}  // namespace nnkr
