#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "nnkr/artifacts.hpp"
#include "nnkr/certificates.hpp"
#include "nnkr/diagnostics.hpp"
#include "nnkr/errors.hpp"
#include "nnkr/parallel.hpp"

namespace nnkr::cli {

namespace {

namespace fs = std::filesystem;

// Exceptions that carry an exit status directly.
struct NonConvergence : Error {
    using Error::Error;
};

struct Common {
    std::string config;
    std::vector<std::string> sets;
    std::string out;
    std::size_t workers = 0;
    std::string seed;
};

void add_common(CLI::App* cmd, Common& c, bool with_out_dir = true) {
    cmd->add_option("--config", c.config, "key = value configuration file");
    cmd->add_option("--set", c.sets, "override a configuration key (key=value); repeatable");
    cmd->add_option("--seed", c.seed, "base seed (overrides the config)");
    cmd->add_option("--workers", c.workers, "worker threads (default: NNKR_WORKERS or all cores)");
    if (with_out_dir) cmd->add_option("--out", c.out, "output directory")->default_val(".");
}

Config build_config(const Common& c) {
    Config cfg = c.config.empty() ? Config{} : Config::load(c.config);
    for (const std::string& kv : c.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!c.seed.empty()) cfg.set("seed", c.seed);
    return cfg;
}

std::size_t resolve_workers(const Common& c, const Config& cfg) {
    if (c.workers > 0) return c.workers;
    if (cfg.has("workers")) {
        const std::size_t w = cfg.get_size("workers", 1);
        if (w == 0) throw ConfigError("workers must be >= 1");
        return w;
    }
    return default_workers();
}

// The digest ignores keys that cannot change results.
std::string config_digest(const Config& cfg) {
    std::string canon;
    for (const auto& [key, entry] : cfg.entries()) {
        if (key == "workers") continue;
        canon += key + "=" + entry.value + "\n";
    }
    return fnv1a_hex(canon);
}

SolverConfig solver_from(const Config& cfg, SolverAlgorithm fallback) {
    SolverConfig s;
    s.algorithm = cfg.has("algorithm") ? parse_algorithm(cfg.get_string("algorithm")) : fallback;
    s.kkt_tolerance = cfg.get_double("kkt_tolerance", s.kkt_tolerance);
    s.max_iterations = cfg.get_size("max_iterations", s.max_iterations);
    try {
        s.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    return s;
}

LawKind law_from(const Config& cfg) {
    try {
        return parse_law(cfg.get_string("law", "complex-gaussian"));
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("law: ") + e.what());
    }
}

const std::set<std::string> kSolverKeys{"algorithm", "kkt_tolerance", "max_iterations", "workers", "seed", "law"};

std::set<std::string> with_solver_keys(std::set<std::string> keys) {
    keys.insert(kSolverKeys.begin(), kSolverKeys.end());
    return keys;
}

struct Output {
    fs::path dir;
    RunManifest manifest;

    void add(const std::string& name, const std::string& content) {
        const fs::path path = dir / name;
        write_file(path.string(), content);
        manifest.artifacts.push_back({path.string(), fnv1a_hex(content)});
    }

    void finish(const std::string& name) {
        manifest.timestamp = utc_timestamp();
        write_file((dir / name).string(), manifest.to_json().dump(2) + "\n");
    }
};

Output open_output(const std::string& dir, const std::string& command, const Config& cfg) {
    Output o;
    o.dir = dir.empty() ? fs::path(".") : fs::path(dir);
    std::error_code ec;
    fs::create_directories(o.dir, ec);
    if (ec) throw InputError(o.dir.string() + ": cannot create output directory: " + ec.message());
    o.manifest.command = command;
    o.manifest.config_digest = config_digest(cfg);
    o.manifest.base_seed = cfg.has("seed") ? cfg.get_u64("seed") : 0;
    return o;
}

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

int cmd_phase(const Common& c, std::ostream& out) {
    Config cfg = build_config(c);
    PhaseConfig pc = phase_config_from(cfg);
    pc.workers = resolve_workers(c, cfg);
    const PhaseDiagram diagram = run_phase_transition(pc);
    Output o = open_output(c.out, "phase", cfg);
    Json summary = to_json(diagram);
    summary["run_id"] = o.manifest.run_id();
    o.add("phase.csv", phase_csv(diagram));
    o.add("phase_summary.json", summary.dump(2) + "\n");
    o.finish("phase_manifest.json");

    out << "phase transition, " << pc.n_rule.describe() << ", " << pc.trials << " trials per cell\n";
    std::size_t unconverged = 0;
    for (const auto& r : diagram.records) unconverged += r.converged ? 0 : 1;
    for (const auto n : pc.n_values) {
        out << "n=" << n << " N=" << pc.n_rule.count(n) << ":";
        for (const auto s : pc.s_values) {
            const PhaseCell& cell = diagram.cell(n, s);
            out << " " << s << ":" << (cell.skipped ? std::string("skip") : fixed(cell.rate(), 2));
        }
        const PhaseCrossing x = diagram.crossing(n);
        out << "\n  boundary n^2/4-n-25 = " << fixed(x.boundary, 2) << ", 50% crossing = ";
        if (x.s_star) {
            out << fixed(*x.s_star, 2);
        } else {
            out << (x.censored_above ? "above the grid" : "below the grid");
        }
        out << "\n";
    }
    out << "wrote " << (o.dir / "phase.csv").string() << "\n";
    if (unconverged > 0) {
        throw NonConvergence(std::to_string(unconverged) + " solves did not reach the KKT tolerance");
    }
    return kOk;
}

int cmd_noise(const Common& c, std::ostream& out) {
    Config cfg = build_config(c);
    NoiseConfig nc = noise_config_from(cfg);
    nc.workers = resolve_workers(c, cfg);
    const NoiseReport rep = run_noise_linearity(nc);
    Output o = open_output(c.out, "noise", cfg);
    Json summary = to_json(rep);
    summary["run_id"] = o.manifest.run_id();
    o.add("noise.csv", noise_csv(rep));
    o.add("noise_summary.json", summary.dump(2) + "\n");
    o.finish("noise_manifest.json");
    out << "noise linearity, n=" << nc.n << " N=" << nc.count << " s=" << nc.s << "\n";
    for (const auto& r : rep.rows) {
        out << "  ||E||_F=" << format_double(r.scale) << " mean error=" << format_double(r.mean_error)
            << " bound=" << format_double(r.bound) << "\n";
    }
    out << "slope=" << format_double(rep.slope) << " R^2=" << format_double(rep.r_squared)
        << " all below bound=" << (rep.all_below_bound ? "yes" : "no")
        << " dominance violations=" << rep.dominance_violations << "\n";
    for (const auto& r : rep.records) {
        if (!r.converged) throw NonConvergence("a noise-linearity solve did not reach the KKT tolerance");
    }
    return kOk;
}

int cmd_covmatch(const Common& c, std::ostream& out) {
    Config cfg = build_config(c);
    CovmatchConfig cc = covmatch_config_from(cfg);
    cc.workers = resolve_workers(c, cfg);
    const CovmatchReport rep = run_covmatch_sweep(cc);
    Output o = open_output(c.out, "covmatch", cfg);
    Json summary = to_json(rep);
    summary["run_id"] = o.manifest.run_id();
    o.add("covmatch.csv", covmatch_csv(rep));
    o.add("covmatch_summary.json", summary.dump(2) + "\n");
    o.finish("covmatch_manifest.json");
    out << "covariance matching, n=" << cc.scenario.n << " N=" << cc.scenario.count << " s=" << cc.scenario.s
        << " noise power=" << format_double(cc.scenario.noise_power) << "\n";
    for (const auto& r : rep.rows) {
        out << "  M=" << r.antennas << " median relative error=" << format_double(r.median_relative_error)
            << " recall=" << format_double(r.mean_recall) << " precision=" << format_double(r.mean_precision)
            << "\n";
    }
    return kOk;
}

// Prints the JSON or writes it with a manifest when an output path is given.
int emit(const Json& body, const std::string& command, const Config& cfg, const std::string& out_path,
         std::ostream& out) {
    if (out_path.empty()) {
        Json j = body;
        RunManifest m;
        m.command = command;
        m.config_digest = config_digest(cfg);
        m.base_seed = cfg.has("seed") ? cfg.get_u64("seed") : 0;
        j["run_id"] = m.run_id();
        out << j.dump(2) << "\n";
        return kOk;
    }
    const fs::path path(out_path);
    Output o = open_output(path.has_parent_path() ? path.parent_path().string() : ".", command, cfg);
    Json j = body;
    j["run_id"] = o.manifest.run_id();
    o.add(path.filename().string(), j.dump(2) + "\n");
    o.finish(path.stem().string() + "_manifest.json");
    out << "wrote " << path.string() << "\n";
    return kOk;
}

struct CertifyOptions {
    double eta = 1.0 / 3.0;
    double delta = 1.0 / 6.0;
    std::size_t n = 0;
    std::size_t count = 0;
    double alpha = 1.0;
    std::string stage = "full";
    std::string out;
};

int cmd_certify(const CertifyOptions& o, std::ostream& out) {
    Config cfg;
    cfg.set("eta", format_double(o.eta));
    cfg.set("delta", format_double(o.delta));
    cfg.set("stage", o.stage);
    if (o.n > 0) cfg.set("n", std::to_string(o.n));
    if (o.count > 0) cfg.set("N", std::to_string(o.count));
    cfg.set("alpha", format_double(o.alpha));
    Json body;
    if (o.stage == "nsp") {
        const NspCertificate cert = rip_to_nsp(o.delta, 1);
        const CdConstants cd = cd_constants(cert.rho);
        body["delta"] = o.delta;
        body["constants"] = Json::array({
            Json{{"name", "rho"}, {"value", cert.rho}, {"formula", "delta / (sqrt(1 - delta^2) - delta/4)"}},
            Json{{"name", "tau"}, {"value", cert.tau}, {"formula", "sqrt(1 + delta) / (sqrt(1 - delta^2) - delta/4)"}},
            Json{{"name", "C(rho)"}, {"value", cd.C}, {"formula", "(1 + rho)^2 / (1 - rho)"}},
            Json{{"name", "D(rho)"}, {"value", cd.D}, {"formula", "(3 + rho) / (1 - rho)"}},
        });
        Json notes = Json::array();
        if (std::abs(o.delta - 0.5) < 1e-12) {
            notes.push_back("tau = " + fixed(cert.tau, 4) +
                            " from the formula; the value 1.5 quoted for delta = 0.5 in the figure caption is "
                            "not what the formula gives");
        }
        body["notes"] = notes;
    } else if (o.stage == "full") {
        body = to_json(constant_chain(o.eta, o.delta, o.n, o.count, o.alpha));
    } else {
        throw ConfigError("--stage must be nsp or full");
    }
    return emit(body, "certify", cfg, o.out, out);
}

struct RipOptions {
    std::string source = "gaussian";
    std::size_t rows = 8;
    std::size_t cols = 12;
    std::size_t n = 3;
    std::size_t count = 12;
    std::string law = "complex-gaussian";
    std::size_t s = 2;
    std::string method = "auto";
    std::size_t supports = 10000;
};

RealMatrix rip_matrix(const RipOptions& o, std::uint64_t seed) {
    if (o.source == "gaussian") {
        if (o.rows == 0 || o.cols == 0) throw ConfigError("--rows and --cols must be positive");
        Engine engine = make_engine(seed, {stream::kEnsembleVector});
        std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(o.rows)));
        RealMatrix phi(static_cast<Eigen::Index>(o.rows), static_cast<Eigen::Index>(o.cols));
        for (Eigen::Index j = 0; j < phi.cols(); ++j) {
            for (Eigen::Index i = 0; i < phi.rows(); ++i) phi(i, j) = normal(engine);
        }
        return phi;
    }
    if (o.source == "ensemble") {
        return build_phi(MeasurementEnsemble::sample(o.n, o.count, SubgaussianLaw::standard(parse_law(o.law)), seed));
    }
    throw ConfigError("--source must be gaussian or ensemble");
}

int cmd_rip(const Common& c, const RipOptions& o, std::ostream& out) {
    Config cfg = build_config(c);
    const std::uint64_t seed = cfg.get_u64("seed", 0);
    cfg.set("source", o.source);
    cfg.set("s", std::to_string(o.s));
    cfg.set("method", o.method);
    if (o.source == "gaussian") {
        cfg.set("rows", std::to_string(o.rows));
        cfg.set("cols", std::to_string(o.cols));
    } else {
        cfg.set("n", std::to_string(o.n));
        cfg.set("N", std::to_string(o.count));
        cfg.set("law", o.law);
    }
    const RealMatrix phi = rip_matrix(o, seed);
    RipEstimate est;
    if (o.method == "exhaustive" ||
        (o.method == "auto" && binomial(static_cast<std::uint64_t>(phi.cols()), o.s) <= kRipSupportGuard)) {
        est = rip_exhaustive(phi, o.s, resolve_workers(c, cfg));
    } else if (o.method == "sampled" || o.method == "auto") {
        est = rip_sampled(phi, o.s, o.supports, seed);
    } else {
        throw ConfigError("--method must be auto, exhaustive or sampled");
    }
    Json body = to_json(est);
    body["matrix"] = {{"source", o.source}, {"rows", phi.rows()}, {"cols", phi.cols()}, {"seed", seed}};
    if (est.delta < kRipNspLimit && o.s % 2 == 0) {
        const NspCertificate cert = rip_to_nsp(std::max(est.delta, 1e-300), o.s / 2);
        body["implied_nsp"] = {{"order", cert.s}, {"rho", cert.rho}, {"tau", cert.tau},
                               {"certified", !est.lower_bound}};
    }
    return emit(body, "diagnose rip", cfg, c.out, out);
}

struct NspOptions {
    std::size_t n = 3;
    std::size_t count = 12;
    std::string law = "complex-gaussian";
    std::size_t s = 1;
    double q = 2.0;
    double rho = -1.0;
    double tau = -1.0;
    std::string norm = "l2-columns";
    std::size_t trials = 10000;
};

int cmd_nsp(const Common& c, const NspOptions& o, std::ostream& out) {
    Config cfg = build_config(c);
    const std::uint64_t seed = cfg.get_u64("seed", 0);
    cfg.set("n", std::to_string(o.n));
    cfg.set("N", std::to_string(o.count));
    cfg.set("law", o.law);
    cfg.set("s", std::to_string(o.s));
    cfg.set("norm", o.norm);
    cfg.set("trials", std::to_string(o.trials));
    const auto e = MeasurementEnsemble::sample(o.n, o.count, SubgaussianLaw::standard(parse_law(o.law)), seed);
    NspCertificate cert;
    Json source;
    if (o.rho >= 0.0 && o.tau > 0.0) {
        cert.q = o.q;
        cert.s = o.s;
        cert.rho = o.rho;
        cert.tau = o.tau;
        cert.norm_tag = parse_norm_tag(o.norm);
        cfg.set("rho", format_double(o.rho));
        cfg.set("tau", format_double(o.tau));
        source = "given";
    } else {
        // Certify from the exhaustive RIP constant of order 2s of Phi.
        const RealMatrix phi = build_phi(e);
        const RipEstimate est = rip_exhaustive(phi, 2 * o.s, resolve_workers(c, cfg));
        if (!(est.delta < kRipNspLimit)) {
            throw InfeasibleError("delta_2s = " + format_double(est.delta) +
                                  " >= 4/sqrt(41); no NSP certificate follows from the RIP");
        }
        cert = rip_to_nsp(std::max(est.delta, 1e-300), o.s, NormTag::l2_columns);
        if (parse_norm_tag(o.norm) == NormTag::frobenius) {
            cert.norm_tag = NormTag::frobenius;
            cert.tau *= std::sqrt(2.0) / std::sqrt(static_cast<double>(e.m()));
        }
        source = {{"rip_delta_2s", est.delta}, {"method", "exhaustive"}};
    }
    const NspCheckReport rep = nsp_sampled_check(e, cert, o.trials, seed);
    Json body = to_json(rep);
    body["certificate"] = {{"q", cert.q},
                           {"s", cert.s},
                           {"rho", cert.rho},
                           {"tau", cert.tau},
                           {"norm", std::string(to_string(cert.norm_tag))},
                           {"source", source}};
    return emit(body, "diagnose nsp", cfg, c.out, out);
}

struct TailOptions {
    std::string law = "complex-gaussian";
    double psi2 = 0.0;
    std::size_t n = 16;
    std::size_t count = 1000;
    std::vector<double> etas{0.25, 0.5};
    std::vector<double> omegas{0.25, 0.5};
    std::size_t samples = 10000;
    double c = UniversalConstants{}.hanson_wright_c;
    double gamma = UniversalConstants{}.tail_gamma;
};

int cmd_tails(const Common& c, const TailOptions& o, std::ostream& out) {
    Config cfg = build_config(c);
    const std::uint64_t seed = cfg.get_u64("seed", 0);
    SubgaussianLaw law = SubgaussianLaw::standard(parse_law(o.law));
    if (o.psi2 > 0.0) law = law.with_psi2_bound(o.psi2);
    cfg.set("law", o.law);
    cfg.set("psi2", format_double(law.psi2_bound));
    cfg.set("n", std::to_string(o.n));
    cfg.set("samples", std::to_string(o.samples));
    cfg.set("c", format_double(o.c));
    cfg.set("gamma", format_double(o.gamma));
    // Check the premise before spending time on sampling.
    if (static_cast<double>(o.n) < std::pow(law.psi2_bound, 4.0)) {
        throw PreconditionError("tails: the fourth-order bound requires n >= psi2^4 (n = " + std::to_string(o.n) +
                                ", psi2^4 = " + format_double(std::pow(law.psi2_bound, 4.0)) + ")");
    }
    Json body;
    body["norm_concentration"] =
        to_json(norm_concentration_check(law, o.n, o.count, o.etas, o.samples, derive_seed(seed, {0}), o.c));
    body["fourth_order_tail"] =
        to_json(fourth_order_tail_check(law, o.n, o.omegas, o.samples, derive_seed(seed, {1}), o.gamma));
    return emit(body, "diagnose tails", cfg, c.out, out);
}

struct PsiOptions {
    std::string law = "complex-gaussian";
    std::string input;
    std::size_t samples = 10000;
    double r = 2.0;
    std::size_t p_max = 20;
};

int cmd_psi(const Common& c, const PsiOptions& o, std::ostream& out) {
    Config cfg = build_config(c);
    const std::uint64_t seed = cfg.get_u64("seed", 0);
    cfg.set("r", format_double(o.r));
    cfg.set("p_max", std::to_string(o.p_max));
    std::vector<double> xs;
    Json source;
    if (!o.input.empty()) {
        std::ifstream in(o.input);
        if (!in) throw InputError(o.input + ": cannot open samples file");
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            try {
                std::size_t used = 0;
                xs.push_back(std::stod(line, &used));
            } catch (const std::exception&) {
                throw InputError(o.input + ":" + std::to_string(lineno) + ": not a number");
            }
        }
        cfg.set("input", fnv1a_hex(read_file(o.input)));
        source = {{"input", o.input}};
    } else {
        const SubgaussianLaw law = SubgaussianLaw::standard(parse_law(o.law));
        Engine engine = make_engine(seed, {stream::kTail, 2});
        for (std::size_t i = 0; i < o.samples; ++i) xs.push_back(sample_coordinate(law, engine).real());
        cfg.set("law", o.law);
        cfg.set("samples", std::to_string(o.samples));
        source = {{"law", o.law}, {"coordinate", "real part"}, {"samples", o.samples}, {"seed", seed}};
    }
    Json body;
    body["r"] = o.r;
    body["p_max"] = o.p_max;
    body["estimate"] = psi_r_estimate(xs, o.r, o.p_max);
    body["lower_estimate"] = true;
    body["source"] = source;
    return emit(body, "diagnose psi", cfg, c.out, out);
}

struct EnsembleOptions {
    std::size_t n = 4;
    std::size_t count = 8;
    std::string law = "complex-gaussian";
    double psi2 = 0.0;
    std::string save;
    std::string load;
};

int cmd_ensemble(const Common& c, const EnsembleOptions& o, std::ostream& out) {
    if (!o.load.empty()) {
        std::ifstream in(o.load);
        if (!in) throw InputError(o.load + ": cannot open ensemble file");
        const MeasurementEnsemble e = load_ensemble(in);
        Json j{{"n", e.n()},
               {"N", e.size()},
               {"m", e.m()},
               {"law", std::string(to_string(e.law()->kind))},
               {"psi2", e.law()->psi2_bound},
               {"seed", *e.seed()},
               {"mean_squared_norm", e.squared_norms().mean()}};
        out << j.dump(2) << "\n";
        return kOk;
    }
    Config cfg = build_config(c);
    cfg.require("seed");
    SubgaussianLaw law = SubgaussianLaw::standard(parse_law(o.law));
    if (o.psi2 > 0.0) law = law.with_psi2_bound(o.psi2);
    const MeasurementEnsemble e = MeasurementEnsemble::sample(o.n, o.count, law, cfg.get_u64("seed"));
    if (o.save.empty()) throw ConfigError("ensemble: give --save <file> or --load <file>");
    std::ostringstream os;
    save_ensemble(e, os);
    write_file(o.save, os.str());
    out << "wrote " << o.save << "\n";
    return kOk;
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const NonConvergence*>(&e)) return kNonConvergence;
    if (dynamic_cast<const PreconditionError*>(&e)) return kPrecondition;
    if (dynamic_cast<const InfeasibleError*>(&e) || dynamic_cast<const DomainError*>(&e)) return kInfeasible;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParameterError*>(&e) ||
        dynamic_cast<const DimensionError*>(&e) || dynamic_cast<const InputError*>(&e) ||
        dynamic_cast<const ContractError*>(&e)) {
        return kConfigError;
    }
    return kFailure;
}

PhaseConfig phase_config_from(const Config& cfg) {
    cfg.check_known(with_solver_keys({"n", "s", "trials", "N_rule", "threshold"}));
    cfg.require("seed");
    PhaseConfig pc;
    pc.seed = cfg.get_u64("seed");
    pc.n_values = cfg.get_size_list("n", pc.n_values);
    pc.s_values = cfg.get_size_list("s", pc.s_values);
    pc.trials = cfg.get_size("trials", pc.trials);
    pc.n_rule = NRule::parse(cfg.get_string("N_rule", "2m"));
    pc.success_threshold = cfg.get_double("threshold", pc.success_threshold);
    pc.law = law_from(cfg);
    pc.solver = solver_from(cfg, SolverAlgorithm::active_set);
    pc.validate();
    return pc;
}

NoiseConfig noise_config_from(const Config& cfg) {
    cfg.check_known(with_solver_keys({"n", "N", "s", "scales", "trials", "p", "c2", "c3", "c4"}));
    cfg.require("seed");
    NoiseConfig nc;
    nc.seed = cfg.get_u64("seed");
    nc.n = cfg.get_size("n", nc.n);
    nc.count = cfg.get_size("N", nc.count);
    nc.s = cfg.get_size("s", nc.s);
    nc.scales = cfg.get_double_list("scales", {});
    nc.trials = cfg.get_size("trials", nc.trials);
    nc.p = cfg.get_double("p", nc.p);
    nc.c2 = cfg.get_double("c2", nc.c2);
    nc.c3 = cfg.get_double("c3", nc.c3);
    nc.c4 = cfg.get_double("c4", nc.c4);
    nc.law = law_from(cfg);
    nc.solver = solver_from(cfg, SolverAlgorithm::active_set);
    nc.validate();
    return nc;
}

CovmatchConfig covmatch_config_from(const Config& cfg) {
    cfg.check_known(with_solver_keys({"n", "N", "s", "antennas", "noise_power", "trials", "detection_threshold"}));
    cfg.require("seed");
    CovmatchConfig cc;
    cc.seed = cfg.get_u64("seed");
    cc.scenario.n = cfg.get_size("n", cc.scenario.n);
    cc.scenario.count = cfg.get_size("N", cc.scenario.count);
    cc.scenario.s = cfg.get_size("s", cc.scenario.s);
    cc.scenario.noise_power = cfg.get_double("noise_power", cc.scenario.noise_power);
    cc.scenario.law = law_from(cfg);
    cc.antenna_counts = cfg.get_size_list("antennas", cc.antenna_counts);
    cc.scenario.antennas = cc.antenna_counts.front();
    cc.trials = cfg.get_size("trials", cc.trials);
    cc.detection_threshold = cfg.get_double("detection_threshold", cc.detection_threshold);
    cc.solver = solver_from(cfg, SolverAlgorithm::active_set);
    try {
        cc.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    return cc;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse nonnegative recovery from rank-one measurements via NNLS"};
    app.name(args.empty() ? "nnkr" : fs::path(args[0]).filename().string());
    app.require_subcommand(1);
    app.set_version_flag("--version", NNKR_VERSION);

    Common phase_c, noise_c, cov_c, rip_c, nsp_c, tails_c, psi_c, ens_c;
    auto* phase = app.add_subcommand("phase", "phase-transition grid over (n, s)");
    add_common(phase, phase_c);
    auto* noise = app.add_subcommand("noise", "error versus noise level at a fixed instance");
    add_common(noise, noise_c);
    auto* cov = app.add_subcommand("covmatch", "covariance matching over antenna counts");
    add_common(cov, cov_c);

    CertifyOptions cert_o;
    auto* certify = app.add_subcommand("certify", "constant chain delta -> (rho, tau) -> (C, D) -> (c2, c3, c4)");
    certify->add_option("--eta", cert_o.eta, "norm concentration level")->default_str("1/3");
    certify->add_option("--delta", cert_o.delta, "RIP level")->default_str("1/6");
    certify->add_option("--n", cert_o.n, "dimension for the sparsity threshold");
    certify->add_option("--N", cert_o.count, "number of measurements for the sparsity threshold");
    certify->add_option("--alpha", cert_o.alpha, "sparsity threshold scale")->capture_default_str();
    certify->add_option("--stage", cert_o.stage, "nsp (delta -> rho, tau, C, D) or full")->capture_default_str();
    certify->add_option("--out", cert_o.out, "write the JSON report to this file");

    auto* diagnose = app.add_subcommand("diagnose", "desk-scale verification of the random-matrix claims");
    diagnose->require_subcommand(1);

    RipOptions rip_o;
    auto* rip = diagnose->add_subcommand("rip", "restricted isometry constant of a matrix");
    add_common(rip, rip_c, false);
    rip->add_option("--out", rip_c.out, "write the JSON report to this file");
    rip->add_option("--source", rip_o.source, "gaussian (rows x cols, N(0, 1/rows)) or ensemble (Phi)");
    rip->add_option("--rows", rip_o.rows);
    rip->add_option("--cols", rip_o.cols);
    rip->add_option("--n", rip_o.n);
    rip->add_option("--N", rip_o.count);
    rip->add_option("--law", rip_o.law);
    rip->add_option("--s", rip_o.s, "sparsity order");
    rip->add_option("--method", rip_o.method, "auto, exhaustive or sampled");
    rip->add_option("--supports", rip_o.supports, "random supports for the sampled method");

    NspOptions nsp_o;
    auto* nsp = diagnose->add_subcommand("nsp", "sampled check of the robust nullspace property");
    add_common(nsp, nsp_c, false);
    nsp->add_option("--out", nsp_c.out, "write the JSON report to this file");
    nsp->add_option("--n", nsp_o.n);
    nsp->add_option("--N", nsp_o.count);
    nsp->add_option("--law", nsp_o.law);
    nsp->add_option("--s", nsp_o.s);
    nsp->add_option("--q", nsp_o.q);
    nsp->add_option("--rho", nsp_o.rho, "certificate rho (default: from the exhaustive RIP constant)");
    nsp->add_option("--tau", nsp_o.tau, "certificate tau");
    nsp->add_option("--norm", nsp_o.norm, "l2-columns (||Phi v||_2) or frobenius (||A(v)||_F)");
    nsp->add_option("--trials", nsp_o.trials);

    TailOptions tail_o;
    auto* tails = diagnose->add_subcommand("tails", "Monte-Carlo tails next to their analytic bounds");
    add_common(tails, tails_c, false);
    tails->add_option("--out", tails_c.out, "write the JSON report to this file");
    tails->add_option("--law", tail_o.law);
    tails->add_option("--psi2", tail_o.psi2, "looser psi_2 bound for the law");
    tails->add_option("--n", tail_o.n);
    tails->add_option("--N", tail_o.count);
    tails->add_option("--eta", tail_o.etas)->delimiter(',');
    tails->add_option("--omega", tail_o.omegas)->delimiter(',');
    tails->add_option("--samples", tail_o.samples);
    tails->add_option("--c", tail_o.c);
    tails->add_option("--gamma", tail_o.gamma);

    PsiOptions psi_o;
    auto* psi = diagnose->add_subcommand("psi", "moment-based psi_r estimate");
    add_common(psi, psi_c, false);
    psi->add_option("--out", psi_c.out, "write the JSON report to this file");
    psi->add_option("--law", psi_o.law, "sample the real part of one coordinate of this law");
    psi->add_option("--input", psi_o.input, "file with one sample per line");
    psi->add_option("--samples", psi_o.samples);
    psi->add_option("--r", psi_o.r);
    psi->add_option("--pmax", psi_o.p_max);

    EnsembleOptions ens_o;
    auto* ens = app.add_subcommand("ensemble", "save or inspect an ensemble artifact");
    add_common(ens, ens_c, false);
    ens->add_option("--n", ens_o.n);
    ens->add_option("--N", ens_o.count);
    ens->add_option("--law", ens_o.law);
    ens->add_option("--psi2", ens_o.psi2);
    ens->add_option("--save", ens_o.save, "write the artifact to this file");
    ens->add_option("--load", ens_o.load, "print a summary of this artifact");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*phase) return cmd_phase(phase_c, out);
        if (*noise) return cmd_noise(noise_c, out);
        if (*cov) return cmd_covmatch(cov_c, out);
        if (*certify) return cmd_certify(cert_o, out);
        if (*rip) return cmd_rip(rip_c, rip_o, out);
        if (*nsp) return cmd_nsp(nsp_c, nsp_o, out);
        if (*tails) return cmd_tails(tails_c, tail_o, out);
        if (*psi) return cmd_psi(psi_c, psi_o, out);
        if (*ens) return cmd_ensemble(ens_c, ens_o, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return kFailure;
}

}  // namespace nnkr::cli
