#include "nnkr/artifacts.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <system_error>

#include "nnkr/errors.hpp"

namespace nnkr {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw InputError("format_double: conversion failed");
    return std::string(buf, ptr);
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(path + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError(path + ": write failed");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path + ": cannot open for reading");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

namespace {

std::string b(bool v) {
    return v ? "1" : "0";
}

}  // namespace

std::string phase_csv(const PhaseDiagram& diagram) {
    std::string out = "n,s,trial,seed,success,error_l2,residual,iterations,N,kkt,converged\n";
    for (const auto& r : diagram.records) {
        out += std::to_string(r.n) + "," + std::to_string(r.s) + "," + std::to_string(r.trial) + "," +
               std::to_string(r.seed) + "," + b(r.success) + "," + format_double(r.error_l2) + "," +
               format_double(r.residual) + "," + std::to_string(r.iterations) + "," + std::to_string(r.count) +
               "," + format_double(r.kkt) + "," + b(r.converged) + "\n";
    }
    return out;
}

std::string noise_csv(const NoiseReport& report) {
    std::string out = "n,s,trial,seed,success,error_l2,residual,iterations,N,scale,e_frob,bound,kkt,converged\n";
    for (const auto& r : report.records) {
        out += std::to_string(r.n) + "," + std::to_string(r.s) + "," + std::to_string(r.trial) + "," +
               std::to_string(r.seed) + "," + b(r.success) + "," + format_double(r.error_l2) + "," +
               format_double(r.residual) + "," + std::to_string(r.iterations) + "," + std::to_string(r.count) +
               "," + format_double(r.scale) + "," + format_double(r.e_frob) + "," + format_double(r.bound) + "," +
               format_double(r.kkt) + "," + b(r.converged) + "\n";
    }
    return out;
}

std::string covmatch_csv(const CovmatchReport& report) {
    std::string out = "M,trial,seed,error_l2,relative_error,recall,precision,residual,iterations,converged\n";
    for (const auto& r : report.records) {
        out += std::to_string(r.antennas) + "," + std::to_string(r.trial) + "," + std::to_string(r.seed) + "," +
               format_double(r.error_l2) + "," + format_double(r.relative_error) + "," + format_double(r.recall) +
               "," + format_double(r.precision) + "," + format_double(r.residual) + "," +
               std::to_string(r.iterations) + "," + b(r.converged) + "\n";
    }
    return out;
}

Json to_json(const SolverConfig& cfg) {
    return Json{{"algorithm", std::string(to_string(cfg.algorithm))},
                {"kkt_tolerance", cfg.kkt_tolerance},
                {"max_iterations", cfg.max_iterations},
                {"objective_scale", cfg.objective_scale == 0.0 ? Json("auto") : Json(cfg.objective_scale)}};
}

Json to_json(const PhaseDiagram& diagram) {
    const auto& c = diagram.config;
    Json j;
    j["experiment"] = "phase-transition";
    j["n_values"] = c.n_values;
    j["s_values"] = c.s_values;
    j["N_rule"] = c.n_rule.describe();
    j["trials_per_cell"] = c.trials;
    j["success_threshold"] = c.success_threshold;
    j["seed"] = c.seed;
    j["law"] = std::string(to_string(c.law));
    j["solver"] = to_json(c.solver);
    Json cells = Json::array();
    for (const auto& cell : diagram.cells) {
        cells.push_back({{"n", cell.n},
                         {"s", cell.s},
                         {"N", cell.count},
                         {"successes", cell.successes},
                         {"trials", cell.trials},
                         {"rate", cell.rate()},
                         {"skipped", cell.skipped}});
    }
    j["cells"] = cells;
    Json crossings = Json::array();
    for (const auto n : c.n_values) {
        const PhaseCrossing x = diagram.crossing(n);
        crossings.push_back({{"n", n},
                             {"boundary", x.boundary},
                             {"s_star", x.s_star ? Json(*x.s_star) : Json(nullptr)},
                             {"censored_above", x.censored_above},
                             {"censored_below", x.censored_below}});
    }
    j["crossings"] = crossings;
    double max_residual = 0.0;
    std::size_t unconverged = 0;
    for (const auto& r : diagram.records) {
        max_residual = std::max(max_residual, r.residual);
        unconverged += r.converged ? 0 : 1;
    }
    j["max_residual"] = max_residual;
    j["unconverged"] = unconverged;
    return j;
}

Json to_json(const NoiseReport& report) {
    const auto& c = report.config;
    Json j;
    j["experiment"] = "noise-linearity";
    j["n"] = c.n;
    j["N"] = c.count;
    j["s"] = c.s;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["law"] = std::string(to_string(c.law));
    j["p"] = c.p;
    j["constants"] = {{"c2", c.c2}, {"c3", c.c3}, {"c4", c.c4}};
    j["solver"] = to_json(c.solver);
    Json rows = Json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"e_frob", r.scale},
                        {"mean_error_l2", r.mean_error},
                        {"max_error_l2", r.max_error},
                        {"bound", r.bound},
                        {"max_residual_minus_e_frob", r.max_residual_excess}});
    }
    j["rows"] = rows;
    j["slope"] = report.slope;
    j["r_squared"] = report.r_squared;
    j["all_below_bound"] = report.all_below_bound;
    j["dominance_violations"] = report.dominance_violations;
    j["sparsity_threshold_2s_alpha1"] = report.sparsity_threshold_2s;
    return j;
}

Json to_json(const CovmatchReport& report) {
    const auto& c = report.config;
    Json j;
    j["experiment"] = "covariance-matching";
    j["n"] = c.scenario.n;
    j["N"] = c.scenario.count;
    j["s"] = c.scenario.s;
    j["noise_power"] = c.scenario.noise_power;
    j["law"] = std::string(to_string(c.scenario.law));
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["detection_threshold"] = c.detection_threshold;
    j["solver"] = to_json(c.solver);
    Json rows = Json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"M", r.antennas},
                        {"median_relative_error", r.median_relative_error},
                        {"mean_relative_error", r.mean_relative_error},
                        {"mean_recall", r.mean_recall},
                        {"mean_precision", r.mean_precision}});
    }
    j["rows"] = rows;
    return j;
}

Json to_json(const ConstantChain& chain) {
    Json j;
    j["eta"] = chain.eta;
    j["delta"] = chain.delta;
    Json constants = Json::array();
    for (const auto& c : chain.constants) {
        constants.push_back({{"name", c.name}, {"value", c.value}, {"formula", c.formula}, {"inputs", c.inputs}});
    }
    j["constants"] = constants;
    j["notes"] = chain.notes;
    return j;
}

Json to_json(const RipEstimate& est) {
    return Json{{"s", est.s},
                {"delta", est.delta},
                {"method", std::string(to_string(est.method))},
                {"supports_checked", est.supports_checked},
                {"lower_bound", est.lower_bound}};
}

Json to_json(const NspCheckReport& report) {
    return Json{{"trials", report.trials},
                {"checks", report.checks},
                {"violations", report.violations},
                {"worst_ratio", report.worst_ratio},
                {"violations_by_kind", report.violations_by_kind}};
}

Json to_json(const TailCheckReport& report) {
    Json j;
    j["kind"] = report.kind;
    j["law"] = report.law;
    j["samples"] = report.samples;
    j["parameters"] = report.parameters;
    j["thresholds"] = report.thresholds;
    j["empirical_exceedance"] = report.empirical_exceedance;
    j["analytic_bound"] = report.analytic_bound;
    j["analytic_bound_raw"] = report.analytic_bound_raw;
    j["crossings"] = report.crossings();
    j["sample_mean"] = report.sample_mean;
    j["standard_error"] = report.standard_error;
    j["expected_mean"] = report.expected_mean;
    return j;
}

std::string RunManifest::run_id() const {
    return fnv1a_hex(command + "\n" + config_digest + "\n" + std::to_string(base_seed) + "\n" + version + "\n");
}

Json RunManifest::to_json() const {
    Json j;
    j["run_id"] = run_id();
    j["command"] = command;
    j["config_digest"] = config_digest;
    j["base_seed"] = base_seed;
    Json arts = Json::array();
    for (const auto& a : artifacts) arts.push_back({{"path", a.path}, {"digest", a.digest}});
    j["artifacts"] = arts;
    j["version"] = version;
    j["timestamp"] = timestamp;
    return j;
}

std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
        try {
            now = static_cast<std::time_t>(std::stoll(sde));
        } catch (const std::exception&) {
        }
    }
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace nnkr
