#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/cli.hpp"
#include "nlrd/errors.hpp"

using namespace nlrd;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = NLRD_CONFIG_DIR;

struct Outcome {
    int code;
    std::string out, err;
};

Outcome call(std::vector<std::string> args) {
    args.insert(args.begin(), "nlrd");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string cfg(const std::string& name) { return kConfigs + "/" + name; }

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nlrd_test_cli_" + name);
    fs::remove_all(p);
    return p;
}

json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

}  // namespace

TEST_CASE("simulate on the global example exits 0 with a Global classification") {
    const auto r = call({"simulate", "-c", cfg("global.json")});
    CHECK(r.code == 0);
    const json m = json::parse(r.out);
    CHECK(m["classification"] == "Global");
}

TEST_CASE("rate on a power-law CSV recovers the exponent") {
    const auto r = call({"rate", cfg("powerlaw.csv")});
    CHECK(r.code == 0);
    const json fit = json::parse(r.out);
    CHECK(fit["exponent"].get<double>() == doctest::Approx(-0.5).epsilon(1e-3));
    CHECK(fit["T_est"].get<double>() == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(call({"rate", "/nonexistent.csv"}).code == 1);
}

TEST_CASE("verify case3 fails with exit 2 on a long horizon") {
    const auto ok = call({"verify", "case3", "-c", cfg("case3.json")});
    CHECK(ok.code == 0);
    CHECK(json::parse(ok.out)["satisfied"] == true);
    const auto bad = call({"verify", "case3", "-c", cfg("case3.json"), "--set", "verify.T=10"});
    CHECK(bad.code == 2);
    const json doc = json::parse(bad.out);
    CHECK(doc["satisfied"] == false);
    for (const char* k : {"name", "inputs_digest", "margin", "constants_used", "details"}) CHECK(doc.contains(k));
}

TEST_CASE("load_config applies overrides and rejects unknown keys") {
    const auto base = cli::load_config(cfg("global.json"), {});
    CHECK(base.problem.params.alpha == 0.5);
    const auto over = cli::load_config(cfg("global.json"), {"alpha=3", "policy.t_max=2", "init_u.shape=\"bump_f\""});
    CHECK(over.problem.params.alpha == 3.0);
    CHECK(over.policy.t_max == 2.0);
    CHECK(over.problem.init_u.shape == InitialShape::BumpF);
    const auto bare = cli::load_config(cfg("global.json"), {"init_u.shape=bump_f"});
    CHECK(bare.problem.init_u.shape == InitialShape::BumpF);
    CHECK_THROWS_AS(cli::load_config(cfg("global.json"), {"bogus=1"}), cli::UsageError);
    CHECK_THROWS_AS(cli::load_config(cfg("global.json"), {"alpha"}), cli::UsageError);
    CHECK_THROWS_AS(cli::load_config(cfg("missing.json"), {}), cli::UsageError);

    const auto r = call({"simulate", "-c", cfg("global.json"), "--set", "bogus=1"});
    CHECK(r.code == 1);
    CHECK(r.err.find("bogus") != std::string::npos);
}

TEST_CASE("known_key accepts schema paths only") {
    CHECK(cli::known_key("alpha", cli::ConfigKind::Problem));
    CHECK(cli::known_key("init_v.amplitude", cli::ConfigKind::Problem));
    CHECK(cli::known_key("policy.dt_max", cli::ConfigKind::Problem));
    CHECK(cli::known_key("verify.T", cli::ConfigKind::Problem));
    CHECK_FALSE(cli::known_key("init_v.colour", cli::ConfigKind::Problem));
    CHECK_FALSE(cli::known_key("policy.dtmax", cli::ConfigKind::Problem));
    CHECK(cli::known_key("parallelism", cli::ConfigKind::SweepPlan));
    CHECK(cli::known_key("problem.alpha", cli::ConfigKind::SweepPlan));
    CHECK_FALSE(cli::known_key("alpha", cli::ConfigKind::SweepPlan));
}

TEST_CASE("invalid values are all listed") {
    json doc = read_json(cfg("global.json"));
    doc["alpha"] = -1;
    doc["q"] = -2;
    doc["policy"]["t_max"] = -3;
    try {
        cli::config_from_json(doc);
        FAIL("expected UsageError");
    } catch (const cli::UsageError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("alpha") != std::string::npos);
        CHECK(msg.find("q") != std::string::npos);
        CHECK(msg.find("t_max") != std::string::npos);
    }
}

TEST_CASE("malformed config reports line and column") {
    try {
        cli::parse_json_text("{\n  \"alpha\": ,\n}", "bad.json");
        FAIL("expected UsageError");
    } catch (const cli::UsageError& e) {
        CHECK(std::string(e.what()).find("bad.json:2:") != std::string::npos);
    }
    const auto dir = fresh_dir("malformed");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.json") << "{\"alpha\": 1,,}";
    const auto r = call({"simulate", "-c", (dir / "bad.json").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("bad.json:1:") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("written manifest round-trips to the same problem digest") {
    const auto dir = fresh_dir("manifest");
    const auto r = call({"simulate", "-c", cfg("global.json"), "-o", dir.string(), "--set", "policy.t_max=1"});
    REQUIRE(r.code == 0);
    const json m = read_json(dir / "manifest.json");
    const Problem pb = problem_from_json(m["problem"]);
    CHECK(digest(problem_to_json(pb)) == m["problem_digest"]);
    const auto cfgd = cli::load_config(cfg("global.json"), {});
    CHECK(digest(problem_to_json(cfgd.problem)) == m["problem_digest"]);
    CHECK(fs::exists(dir / "trajectory.csv"));
    const auto rate = call({"rate", (dir / "trajectory.csv").string()});
    CHECK(rate.code != 0);  // a global run has no blow-up window
    fs::remove_all(dir);
}

TEST_CASE("output directory falls back to NLRD_OUTPUT_DIR") {
    const auto dir = fresh_dir("env");
    ::setenv("NLRD_OUTPUT_DIR", dir.string().c_str(), 1);
    const auto r = call({"simulate", "-c", cfg("global.json"), "--set", "policy.t_max=0.5"});
    ::unsetenv("NLRD_OUTPUT_DIR");
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "manifest.json"));
    fs::remove_all(dir);
}

TEST_CASE("every shipped config runs through its verb") {
    struct Case {
        std::vector<std::string> args;
        int code;
    };
    const std::vector<Case> cases = {
        {{"simulate", "-c", cfg("scalar.json")}, 0},
        {{"simulate", "-c", cfg("u_only.json")}, 0},
        {{"simulate", "-c", cfg("v_only.json")}, 0},
        {{"simulate", "-c", cfg("continuation.json")}, 0},
        {{"eigen", "-c", cfg("global.json")}, 0},
        {{"verify", "supersolution", "-c", cfg("kappa_negative.json")}, 0},
        {{"verify", "exponential", "-c", cfg("kappa_zero.json")}, 0},
        {{"verify", "exponential", "-c", cfg("kappa_zero.json"), "--set", "verify.B=0.5"}, 2},
        {{"verify", "lower-bound", "-c", cfg("global.json"), "--set", "policy.t_max=1"}, 0},
        {{"verify", "kaplan", "-c", cfg("kaplan.json")}, 0},
        {{"verify", "case1", "-c", cfg("u_only.json")}, 0},
        {{"verify", "monotone", "-c", cfg("u_only.json")}, 0},
        {{"verify", "nonsim", "-c", cfg("u_only.json")}, 0},
        {{"verify", "nonsim", "-c", cfg("v_only.json")}, 0},
    };
    for (const auto& c : cases) {
        std::string label;
        for (const auto& a : c.args) label += a + " ";
        const auto r = call(c.args);
        CHECK_MESSAGE(r.code == c.code, label, r.err);
        CHECK_MESSAGE(json::accept(r.out), label);
    }
}

TEST_CASE("sweep verb writes the phase table") {
    const auto dir = fresh_dir("sweep");
    const auto r = call({"sweep", "-c", cfg("sweep_plan.json"), "-o", dir.string(), "--set",
                         "axes=[{\"name\":\"alpha\",\"values\":[0.5,3]}]"});
    CHECK(r.code == 0);
    const json rep = json::parse(r.out);
    CHECK(rep["runs"] == 2);
    CHECK(rep["violations"] == 0);
    CHECK(fs::exists(dir / "phase.csv"));
    CHECK(call({"sweep", "-c", cfg("sweep_plan.json"), "--set", "alpha=1"}).code == 1);
    fs::remove_all(dir);
}

TEST_CASE("usage errors exit 1") {
    CHECK(call({}).code == 1);
    CHECK(call({"simulate"}).code == 1);
    CHECK(call({"verify", "nosuch", "-c", cfg("global.json")}).code == 1);
    CHECK(call({"frobnicate"}).code == 1);
}

TEST_CASE("seed changes only seeded verifiers") {
    const auto a = call({"verify", "case3", "-c", cfg("case3.json"), "--seed", "1"});
    const auto b = call({"verify", "case3", "-c", cfg("case3.json"), "--seed", "1"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    const auto s1 = call({"simulate", "-c", cfg("scalar.json"), "--seed", "1"});
    const auto s2 = call({"simulate", "-c", cfg("scalar.json"), "--seed", "2"});
    CHECK(s1.out == s2.out);
}

TEST_CASE("the installed binary agrees with the in-process entry point") {
    const char* bin = std::getenv("NLRD_BIN");
    if (bin == nullptr) return;
    const auto dir = fresh_dir("bin");
    fs::create_directories(dir);
    const std::string cmd = std::string(bin) + " rate " + cfg("powerlaw.csv") + " > " + (dir / "o.json").string();
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(read_json(dir / "o.json") == json::parse(call({"rate", cfg("powerlaw.csv")}).out));
    fs::remove_all(dir);
}
