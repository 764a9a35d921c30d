#include <doctest.h>

#include <filesystem>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "cli.hpp"
#include "nnkr/artifacts.hpp"
#include "nnkr/certificates.hpp"
#include "nnkr/errors.hpp"

namespace fs = std::filesystem;
using nnkr::Json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "nnkr");
    std::ostringstream out, err;
    const int code = nnkr::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nnkr_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

std::size_t count_lines(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

double constant(const Json& j, const std::string& name) {
    for (const auto& c : j["constants"])
        if (c["name"] == name) return c["value"].get<double>();
    FAIL("missing constant " << name);
    return 0.0;
}

}  // namespace

TEST_CASE("phase command") {
    const fs::path dir = scratch("phase");
    write(dir / "tiny.cfg", "seed = 7\nn = 8..10\ns = 2..10\ntrials = 5\n");
    const auto r = run({"phase", "--config", (dir / "tiny.cfg").string(), "--out", (dir / "a").string()});
    REQUIRE(r.code == 0);
    const std::string csv = nnkr::read_file((dir / "a" / "phase.csv").string());
    CHECK(csv.rfind("n,s,trial,seed,success,error_l2,residual,iterations", 0) == 0);
    CHECK(count_lines(csv) == 1 + (10 - 8 + 1) * 9 * 5);
    CHECK(csv.find('\r') == std::string::npos);

    const auto again = run({"phase", "--config", (dir / "tiny.cfg").string(), "--out", (dir / "b").string(),
                            "--workers", "3"});
    REQUIRE(again.code == 0);
    CHECK(nnkr::read_file((dir / "b" / "phase.csv").string()) == csv);

    const Json manifest = Json::parse(nnkr::read_file((dir / "a" / "phase_manifest.json").string()));
    const Json manifest_b = Json::parse(nnkr::read_file((dir / "b" / "phase_manifest.json").string()));
    CHECK(manifest["run_id"] == manifest_b["run_id"]);
    CHECK(manifest["artifacts"][0]["digest"] == nnkr::fnv1a_hex(csv));
    const Json summary = Json::parse(nnkr::read_file((dir / "a" / "phase_summary.json").string()));
    CHECK(summary["run_id"] == manifest["run_id"]);

    // Flags override the file.
    const auto seeded = run({"phase", "--config", (dir / "tiny.cfg").string(), "--out", (dir / "c").string(),
                             "--seed", "8", "--set", "trials=1"});
    REQUIRE(seeded.code == 0);
    CHECK(count_lines(nnkr::read_file((dir / "c" / "phase.csv").string())) == 1 + 3 * 9);
}

TEST_CASE("phase command errors") {
    const fs::path dir = scratch("phase_err");
    write(dir / "noseed.cfg", "n = 8\n");
    const auto missing = run({"phase", "--config", (dir / "noseed.cfg").string(), "--out", dir.string()});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("'seed'") != std::string::npos);

    write(dir / "bad.cfg", "seed = 1\n\nthis is not a pair\n");
    const auto bad = run({"phase", "--config", (dir / "bad.cfg").string(), "--out", dir.string()});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("bad.cfg:3:") != std::string::npos);

    write(dir / "typo.cfg", "seed = 1\ntrails = 3\n");
    CHECK(run({"phase", "--config", (dir / "typo.cfg").string(), "--out", dir.string()}).code == 2);

    write(dir / "short.cfg", "seed = 1\nn = 6\ns = 5\ntrials = 2\nmax_iterations = 1\n");
    CHECK(run({"phase", "--config", (dir / "short.cfg").string(), "--out", dir.string()}).code == 5);

    CHECK(run({"phase", "--config", (dir / "absent.cfg").string()}).code == 2);
}

TEST_CASE("certify command") {
    const auto r = run({"certify"});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(constant(j, "c2") <= 11.36);
    CHECK(constant(j, "c3") <= 15.55);
    CHECK(constant(j, "c4") <= 3.07);
    CHECK(constant(j, "c2") >= 11.28);
    CHECK(j["eta"].get<double>() == 1.0 / 3.0);

    const auto fig = run({"certify", "--delta", "0.5", "--stage", "nsp"});
    REQUIRE(fig.code == 0);
    const Json f = Json::parse(fig.out);
    CHECK(constant(f, "rho") == doctest::Approx(0.6747).epsilon(1e-3));
    CHECK(f["notes"].size() == 1);

    const auto far = run({"certify", "--delta", "0.9"});
    CHECK(far.code == 3);
    CHECK(far.err.find("4/sqrt(41)") != std::string::npos);
    CHECK(run({"certify", "--eta", "0.9", "--delta", "0.3"}).code == 3);

    const fs::path dir = scratch("certify");
    const auto written = run({"certify", "--n", "20", "--N", "1520", "--out", (dir / "chain.json").string()});
    REQUIRE(written.code == 0);
    const Json chain = Json::parse(nnkr::read_file((dir / "chain.json").string()));
    CHECK(constant(chain, "sparsity_threshold_2s") == 265.0);
    CHECK(fs::exists(dir / "chain_manifest.json"));
}

TEST_CASE("diagnose commands") {
    const auto rip = run({"diagnose", "rip", "--rows", "8", "--cols", "12", "--s", "2", "--seed", "3"});
    REQUIRE(rip.code == 0);
    CHECK(Json::parse(rip.out)["method"] == "exhaustive");

    const auto tails = run({"diagnose", "tails", "--n", "2", "--psi2", "2"});
    CHECK(tails.code == 4);

    const auto ok = run({"diagnose", "tails", "--n", "16", "--samples", "500", "--seed", "1"});
    REQUIRE(ok.code == 0);
    CHECK(Json::parse(ok.out)["fourth_order_tail"]["expected_mean"] == 480.0);

    const auto psi = run({"diagnose", "psi", "--r", "1", "--samples", "10000", "--seed", "2"});
    REQUIRE(psi.code == 0);
    const double est = Json::parse(psi.out)["estimate"].get<double>();
    CHECK(std::isfinite(est));
    CHECK(est > 0.0);

    const fs::path dir = scratch("psi");
    write(dir / "few.txt", "1\n2\n3\n");
    CHECK(run({"diagnose", "psi", "--input", (dir / "few.txt").string()}).code == 4);

    const auto nsp = run({"diagnose", "nsp", "--n", "3", "--N", "6", "--rho", "0.99", "--tau", "1e9", "--trials",
                          "100"});
    REQUIRE(nsp.code == 0);
    CHECK(Json::parse(nsp.out)["violations"] == 0);
}

TEST_CASE("ensemble command") {
    const fs::path dir = scratch("ensemble");
    const std::string file = (dir / "e.txt").string();
    REQUIRE(run({"ensemble", "--n", "3", "--N", "5", "--seed", "11", "--save", file}).code == 0);
    const auto info = run({"ensemble", "--load", file});
    REQUIRE(info.code == 0);
    const Json j = Json::parse(info.out);
    CHECK(j["n"] == 3);
    CHECK(j["N"] == 5);
    CHECK(j["seed"] == 11);
    CHECK(run({"ensemble", "--n", "3", "--N", "5", "--save", file}).code == 2);
}

TEST_CASE("argument errors") {
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"certify", "--delta", "abc"}).code == 2);
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"--version"}).code == 0);
}

TEST_CASE("exit code mapping") {
    using namespace nnkr;
    CHECK(cli::exit_code_for(ConfigError("x")) == 2);
    CHECK(cli::exit_code_for(DimensionError("x")) == 2);
    CHECK(cli::exit_code_for(InfeasibleError("x")) == 3);
    CHECK(cli::exit_code_for(DomainError("x")) == 3);
    CHECK(cli::exit_code_for(GuardExceeded("x")) == 4);
    CHECK(cli::exit_code_for(std::runtime_error("x")) == 1);
}
