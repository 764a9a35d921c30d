#include "nnkr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nnkr/errors.hpp"
#include "nnkr/parallel.hpp"
#include "nnkr/rng.hpp"

namespace nnkr {

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::size_t NRule::count(std::size_t n) const {
    if (fixed > 0) return fixed;
    return static_cast<std::size_t>(std::ceil(factor * static_cast<double>(offdiag_dim(n)) - 1e-9));
}

std::string NRule::describe() const {
    if (fixed > 0) return "N = " + std::to_string(fixed) + " (fixed)";
    std::ostringstream os;
    if (factor == 2.0) {
        os << "N = 2m = 4n(n-1)";
    } else if (factor == 1.0) {
        os << "N = m = 2n(n-1)";
    } else {
        os << "N = ceil(" << factor << " * m), m = 2n(n-1)";
    }
    return os.str();
}

NRule NRule::parse(const std::string& text) {
    NRule rule;
    try {
        std::size_t used = 0;
        if (text == "2m") {
            rule.factor = 2.0;
        } else if (text == "m") {
            rule.factor = 1.0;
        } else if (!text.empty() && text[0] == 'x') {
            rule.factor = std::stod(text.substr(1), &used);
            if (used + 1 != text.size() || !(rule.factor > 0.0)) throw ConfigError("");
        } else {
            const long long v = std::stoll(text, &used);
            if (used != text.size() || v <= 0) throw ConfigError("");
            rule.fixed = static_cast<std::size_t>(v);
        }
    } catch (const std::exception&) {
        throw ConfigError("invalid N rule '" + text + "' (expected 2m, m, x<factor> or a positive count)");
    }
    return rule;
}

double phase_boundary(double n) {
    return n * n / 4.0 - n - 25.0;
}

void PhaseConfig::validate() const {
    if (n_values.empty() || s_values.empty()) throw ConfigError("phase: n and s grids must be non-empty");
    for (const auto n : n_values) {
        if (n < 2) throw ConfigError("phase: every n must be >= 2");
    }
    for (const auto s : s_values) {
        if (s < 1) throw ConfigError("phase: every s must be >= 1");
    }
    if (trials < 1) throw ConfigError("phase: trials must be >= 1");
    if (!(success_threshold > 0.0)) throw ConfigError("phase: success threshold must be positive");
    if (workers < 1) throw ConfigError("phase: workers must be >= 1");
    solver.validate();
}

const PhaseCell& PhaseDiagram::cell(std::size_t n, std::size_t s) const {
    for (const auto& c : cells) {
        if (c.n == n && c.s == s) return c;
    }
    throw InputError("phase diagram has no cell (n=" + std::to_string(n) + ", s=" + std::to_string(s) + ")");
}

PhaseCrossing PhaseDiagram::crossing(std::size_t n) const {
    PhaseCrossing out;
    out.n = n;
    out.boundary = phase_boundary(static_cast<double>(n));
    std::vector<const PhaseCell*> row;
    for (const auto& c : cells) {
        if (c.n == n && !c.skipped) row.push_back(&c);
    }
    std::sort(row.begin(), row.end(), [](auto* a, auto* b) { return a->s < b->s; });
    if (row.empty()) return out;
    if (row.front()->rate() < 0.5) {
        out.censored_below = true;
        return out;
    }
    for (std::size_t i = 0; i + 1 < row.size(); ++i) {
        const double r0 = row[i]->rate();
        const double r1 = row[i + 1]->rate();
        if (r0 >= 0.5 && r1 < 0.5) {
            const double s0 = static_cast<double>(row[i]->s);
            const double s1 = static_cast<double>(row[i + 1]->s);
            out.s_star = s0 + (r0 - 0.5) / (r0 - r1) * (s1 - s0);
            return out;
        }
    }
    out.censored_above = true;
    return out;
}

std::uint64_t phase_trial_seed(std::uint64_t base, std::size_t n, std::size_t s, std::size_t trial) {
    return derive_seed(base, {stream::kTrial, n, s, trial});
}

TrialRecord run_phase_trial(std::size_t n, std::size_t s, std::size_t trial, const PhaseConfig& cfg) {
    TrialRecord rec;
    rec.n = n;
    rec.s = s;
    rec.trial = trial;
    rec.count = cfg.n_rule.count(n);
    rec.seed = phase_trial_seed(cfg.seed, n, s, trial);
    if (s > rec.count) throw ParameterError("phase trial: s exceeds N");
    const auto e = MeasurementEnsemble::sample(n, rec.count, SubgaussianLaw::standard(cfg.law),
                                               derive_seed(rec.seed, {stream::kEnsembleVector}));
    Engine engine = make_engine(rec.seed, {stream::kSignal});
    const RealVector x = SparseNonnegSignal::sample(rec.count, s, engine).dense();
    const ComplexMatrix y = forward(e, x);
    const RecoveryReport report = solve_nnls(e, y, cfg.solver);
    rec.error_l2 = (report.x_sharp - x).norm();
    rec.success = rec.error_l2 <= cfg.success_threshold;
    rec.residual = report.residual_frobenius;
    rec.kkt = report.kkt_residual;
    rec.iterations = report.iterations;
    rec.converged = report.converged;
    return rec;
}

PhaseDiagram run_phase_transition(const PhaseConfig& cfg) {
    cfg.validate();
    PhaseDiagram out;
    out.config = cfg;
    struct Task {
        std::size_t n, s, trial;
    };
    std::vector<Task> tasks;
    for (const auto n : cfg.n_values) {
        const std::size_t count = cfg.n_rule.count(n);
        for (const auto s : cfg.s_values) {
            PhaseCell c;
            c.n = n;
            c.s = s;
            c.count = count;
            c.skipped = s > count;
            c.trials = c.skipped ? 0 : cfg.trials;
            out.cells.push_back(c);
            if (c.skipped) continue;
            for (std::size_t t = 0; t < cfg.trials; ++t) tasks.push_back({n, s, t});
        }
    }
    out.records.resize(tasks.size());
    parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
        out.records[i] = run_phase_trial(tasks[i].n, tasks[i].s, tasks[i].trial, cfg);
    });
    for (auto& c : out.cells) {
        for (const auto& r : out.records) {
            if (r.n == c.n && r.s == c.s && r.success) ++c.successes;
        }
    }
    return out;
}

std::vector<double> NoiseConfig::effective_scales() const {
    if (!scales.empty()) return scales;
    std::vector<double> out;
    for (int i = 0; i < 10; ++i) out.push_back(0.01 * std::pow(100.0, i / 9.0));
    return out;
}

void NoiseConfig::validate() const {
    if (n < 2) throw ConfigError("noise: n must be >= 2");
    if (s < 1 || s > count) throw ConfigError("noise: s must lie in [1, N]");
    if (trials < 1) throw ConfigError("noise: trials must be >= 1");
    for (const double sc : scales) {
        if (!(sc >= 0.0)) throw ConfigError("noise: scales must be nonnegative");
    }
    if (!(p >= 1.0 && p <= 2.0)) throw ConfigError("noise: p must lie in [1, 2]");
    if (workers < 1) throw ConfigError("noise: workers must be >= 1");
    solver.validate();
}

ComplexMatrix random_hermitian_unit(std::size_t n, std::uint64_t seed) {
    Engine engine = make_engine(seed, {stream::kNoise});
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto nn = static_cast<Eigen::Index>(n);
    ComplexMatrix g(nn, nn);
    for (Eigen::Index i = 0; i < nn; ++i) {
        for (Eigen::Index j = 0; j < nn; ++j) {
            const double re = normal(engine);
            const double im = normal(engine);
            g(i, j) = Complex(re, im);
        }
    }
    ComplexMatrix h = hermitian_part(g);
    h /= h.norm();
    return h;
}

OriginFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty()) throw DimensionError("fit_through_origin: size mismatch");
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    OriginFit fit;
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    const double ybar = mean(y);
    double sse = 0.0;
    double sst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sse += (y[i] - fit.slope * x[i]) * (y[i] - fit.slope * x[i]);
        sst += (y[i] - ybar) * (y[i] - ybar);
    }
    fit.r_squared = sst > 0.0 ? 1.0 - sse / sst : (sse == 0.0 ? 1.0 : 0.0);
    return fit;
}

// Absolute slack for comparisons that hold with equality at zero noise.
constexpr double kSlack = 1e-9;

NoiseReport run_noise_linearity(const NoiseConfig& cfg) {
    cfg.validate();
    NoiseReport out;
    out.config = cfg;
    const std::vector<double> scales = cfg.effective_scales();
    out.config.scales = scales;
    const std::size_t k = scales.size();
    out.records.resize(k * cfg.trials);
    parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) {
        const std::uint64_t tseed = derive_seed(cfg.seed, {stream::kTrial, cfg.n, cfg.s, t});
        const auto e = MeasurementEnsemble::sample(cfg.n, cfg.count, SubgaussianLaw::standard(cfg.law),
                                                   derive_seed(tseed, {stream::kEnsembleVector}));
        Engine engine = make_engine(tseed, {stream::kSignal});
        const RealVector x = SparseNonnegSignal::sample(cfg.count, cfg.s, engine).dense();
        const ComplexMatrix clean = forward(e, x);
        const ComplexMatrix e0 = random_hermitian_unit(cfg.n, derive_seed(tseed, {stream::kNoise}));
        const double sigma = best_s_term_residual(x, cfg.s);
        for (std::size_t i = 0; i < k; ++i) {
            const ComplexMatrix noise = scales[i] * e0;
            const RecoveryReport report = solve_nnls(e, clean + noise, cfg.solver);
            TrialRecord rec;
            rec.n = cfg.n;
            rec.s = cfg.s;
            rec.count = cfg.count;
            rec.trial = t;
            rec.seed = tseed;
            rec.scale = scales[i];
            rec.e_frob = noise.norm();
            rec.error_l2 = (report.x_sharp - x).norm();
            rec.residual = report.residual_frobenius;
            rec.kkt = report.kkt_residual;
            rec.iterations = report.iterations;
            rec.converged = report.converged;
            rec.bound = subgaussian_error_bound(cfg.c2, cfg.c3, cfg.c4, sigma, rec.e_frob, cfg.n, cfg.s, cfg.p).total;
            rec.success = rec.error_l2 <= rec.bound + kSlack;
            out.records[i * cfg.trials + t] = rec;
        }
    });
    out.all_below_bound = true;
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < k; ++i) {
        NoiseRow row;
        row.scale = scales[i];
        row.max_residual_excess = -kInfinity;
        std::vector<double> errors;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
            const auto& rec = out.records[i * cfg.trials + t];
            errors.push_back(rec.error_l2);
            row.max_error = std::max(row.max_error, rec.error_l2);
            row.bound = std::max(row.bound, rec.bound);
            row.max_residual_excess = std::max(row.max_residual_excess, rec.residual - rec.e_frob);
            if (!rec.success) out.all_below_bound = false;
            if (rec.residual > rec.e_frob + kSlack) ++out.dominance_violations;
        }
        row.mean_error = mean(errors);
        xs.push_back(row.scale);
        ys.push_back(row.mean_error);
        out.rows.push_back(row);
    }
    const OriginFit fit = fit_through_origin(xs, ys);
    out.slope = fit.slope;
    out.r_squared = fit.r_squared;
    if (cfg.count >= offdiag_dim(cfg.n)) out.sparsity_threshold_2s = sparsity_threshold_value(cfg.n, cfg.count, 1.0);
    return out;
}

void CovarianceScenario::validate() const {
    if (n < 2) throw ParameterError("covariance scenario: n must be >= 2");
    if (count < 1) throw ParameterError("covariance scenario: N must be >= 1");
    if (s > count) throw ParameterError("covariance scenario: s must not exceed N");
    if (antennas < 1) throw ParameterError("covariance scenario: M must be >= 1");
    if (!(noise_power >= 0.0)) throw ParameterError("covariance scenario: noise power must be >= 0");
}

Detection detect_support(const RealVector& gamma, const RealVector& gamma_sharp, double threshold) {
    if (gamma.size() != gamma_sharp.size()) throw DimensionError("detect_support: size mismatch");
    const double top = gamma_sharp.size() > 0 ? gamma_sharp.maxCoeff() : 0.0;
    std::size_t hits = 0;
    std::size_t truth = 0;
    Detection d;
    for (Eigen::Index i = 0; i < gamma.size(); ++i) {
        const bool active = gamma[i] > 0.0;
        const bool found = gamma_sharp[i] > 0.0 && gamma_sharp[i] >= threshold * top;
        truth += active ? 1 : 0;
        d.detected += found ? 1 : 0;
        hits += (active && found) ? 1 : 0;
    }
    d.recall = truth == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(truth);
    d.precision = d.detected == 0 ? (truth == 0 ? 1.0 : 0.0)
                                  : static_cast<double>(hits) / static_cast<double>(d.detected);
    return d;
}

CovarianceResult run_covariance_matching(const CovarianceScenario& sc, std::uint64_t instance_seed,
                                         std::uint64_t sample_seed, const SolverConfig& solver,
                                         double detection_threshold, bool zero_gamma) {
    sc.validate();
    const SubgaussianLaw law = SubgaussianLaw::standard(sc.law);
    const auto e = MeasurementEnsemble::sample(sc.n, sc.count, law, derive_seed(instance_seed, {stream::kEnsembleVector}));
    Engine gamma_engine = make_engine(instance_seed, {stream::kSignal});
    SparseNonnegSignal signal = SparseNonnegSignal::sample(sc.count, sc.s, gamma_engine);
    CovarianceResult out;
    out.gamma = zero_gamma ? RealVector::Zero(static_cast<Eigen::Index>(sc.count)) : signal.dense();

    const auto n = static_cast<Eigen::Index>(sc.n);
    const auto k = static_cast<Eigen::Index>(signal.support.size());
    const auto m = static_cast<Eigen::Index>(sc.antennas);
    Eigen::MatrixXcd b(n, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto idx = static_cast<Eigen::Index>(signal.support[static_cast<std::size_t>(j)]);
        b.col(j) = e.vectors().col(idx) * std::sqrt(out.gamma[idx]);
    }
    const SubgaussianLaw fading = SubgaussianLaw::standard(LawKind::complex_gaussian);
    Engine engine = make_engine(sample_seed, {stream::kFading});
    Eigen::MatrixXcd h(k, m);
    Eigen::MatrixXcd w(n, m);
    for (Eigen::Index c = 0; c < m; ++c) h.col(c) = sample_vector(fading, static_cast<std::size_t>(k), engine);
    for (Eigen::Index c = 0; c < m; ++c) w.col(c) = sample_vector(fading, sc.n, engine);
    const Eigen::MatrixXcd obs = b * h + std::sqrt(sc.noise_power) * w;
    const ComplexMatrix y = hermitian_part(ComplexMatrix(obs * obs.adjoint() / static_cast<double>(sc.antennas)));

    out.report = solve_nnls(e, y, solver);
    out.gamma_sharp = out.report.x_sharp;
    out.error_l2 = (out.gamma_sharp - out.gamma).norm();
    const double gnorm = out.gamma.norm();
    out.relative_error = gnorm > 0.0 ? out.error_l2 / gnorm : out.error_l2;
    const Detection d = detect_support(out.gamma, out.gamma_sharp, detection_threshold);
    out.recall = d.recall;
    out.precision = d.precision;
    out.detected = d.detected;
    return out;
}

void CovmatchConfig::validate() const {
    scenario.validate();
    if (antenna_counts.empty()) throw ConfigError("covmatch: antenna list must be non-empty");
    for (const auto m : antenna_counts) {
        if (m < 1) throw ConfigError("covmatch: antenna counts must be >= 1");
    }
    if (trials < 1) throw ConfigError("covmatch: trials must be >= 1");
    if (!(detection_threshold >= 0.0 && detection_threshold <= 1.0)) {
        throw ConfigError("covmatch: detection threshold must lie in [0, 1]");
    }
    if (workers < 1) throw ConfigError("covmatch: workers must be >= 1");
    solver.validate();
}

CovmatchReport run_covmatch_sweep(const CovmatchConfig& cfg) {
    cfg.validate();
    CovmatchReport out;
    out.config = cfg;
    const std::size_t k = cfg.antenna_counts.size();
    out.records.resize(k * cfg.trials);
    parallel_for(k * cfg.trials, cfg.workers, [&](std::size_t task) {
        const std::size_t i = task / cfg.trials;
        const std::size_t t = task % cfg.trials;
        CovarianceScenario sc = cfg.scenario;
        sc.antennas = cfg.antenna_counts[i];
        const std::uint64_t instance = derive_seed(cfg.seed, {stream::kTrial, t});
        const std::uint64_t sample = derive_seed(instance, {stream::kFading, sc.antennas});
        const CovarianceResult r =
            run_covariance_matching(sc, instance, sample, cfg.solver, cfg.detection_threshold);
        CovmatchRecord rec;
        rec.antennas = sc.antennas;
        rec.trial = t;
        rec.seed = instance;
        rec.error_l2 = r.error_l2;
        rec.relative_error = r.relative_error;
        rec.recall = r.recall;
        rec.precision = r.precision;
        rec.residual = r.report.residual_frobenius;
        rec.iterations = r.report.iterations;
        rec.converged = r.report.converged;
        out.records[task] = rec;
    });
    for (std::size_t i = 0; i < k; ++i) {
        CovmatchRow row;
        row.antennas = cfg.antenna_counts[i];
        std::vector<double> rel;
        std::vector<double> rec;
        std::vector<double> prec;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
            const auto& r = out.records[i * cfg.trials + t];
            rel.push_back(r.relative_error);
            rec.push_back(r.recall);
            prec.push_back(r.precision);
        }
        row.median_relative_error = median(rel);
        row.mean_relative_error = mean(rel);
        row.mean_recall = mean(rec);
        row.mean_precision = mean(prec);
        out.rows.push_back(row);
    }
    return out;
}

}  // namespace nnkr
