#include <doctest.h>

#include <sstream>

#include "nnkr/config.hpp"
#include "nnkr/errors.hpp"

using namespace nnkr;

namespace {

Config parse(const std::string& text) {
    std::istringstream in(text);
    return Config::parse(in, "test.cfg");
}

std::string message_of(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("parsing") {
    const Config c = parse("# grid\nseed = 7\n  n = 20,25 ,30  \ns=20..150:10 # inline\nthreshold = 1e-4\nfast = true\n");
    CHECK(c.get_u64("seed") == 7);
    CHECK(c.get_size_list("n", {}) == std::vector<std::size_t>{20, 25, 30});
    CHECK(c.get_size_list("s", {}).size() == 14);
    CHECK(c.get_double("threshold", 0.0) == 1e-4);
    CHECK(c.get_bool("fast", false));
    CHECK(c.get_size("missing", 5) == 5);
    CHECK(c.canonical() == "fast=true\nn=20,25 ,30\ns=20..150:10\nseed=7\nthreshold=1e-4\n");
}

TEST_CASE("line-level diagnostics") {
    CHECK(message_of("seed = 1\nno equals here\n").find("test.cfg:2:") == 0);
    CHECK(message_of("seed = 1\nseed = 2\n").find("duplicate key 'seed'") != std::string::npos);
    CHECK(message_of("a b = 1\n").find("test.cfg:1:") == 0);
    CHECK(message_of("seed =\n").find("empty value") != std::string::npos);

    const Config c = parse("seed = 1\ntrials = many\n");
    try {
        c.get_size("trials", 1);
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("test.cfg:2: trials:") == 0);
    }
    try {
        parse("n = 3\n").require("seed");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("'seed'") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("sede = 1\n").check_known({"seed"}), ConfigError);
}

TEST_CASE("overrides win") {
    Config c = parse("seed = 1\n");
    c.set("seed", "9");
    CHECK(c.get_u64("seed") == 9);
    CHECK(c.entries().at("seed").line == 0);
    CHECK_THROWS_AS(c.set("bad key", "1"), ConfigError);
}

TEST_CASE("lists") {
    CHECK(parse_size_list("2,5..7", "x") == std::vector<std::size_t>{2, 5, 6, 7});
    CHECK(parse_size_list("8..10", "x") == std::vector<std::size_t>{8, 9, 10});
    CHECK(parse_double_list("0.1, 1e-2", "x") == std::vector<double>{0.1, 0.01});
    CHECK_THROWS_AS(parse_size_list("5..2", "x"), ConfigError);
    CHECK_THROWS_AS(parse_size_list("1..4:0", "x"), ConfigError);
    CHECK_THROWS_AS(parse_double_list("", "x"), ConfigError);
    CHECK_THROWS_AS(parse_size_list("-3", "x"), ConfigError);
}
