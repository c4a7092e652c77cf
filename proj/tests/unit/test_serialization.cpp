#include <doctest.h>

#include <cmath>
#include <string>

#include "nlrd/errors.hpp"
#include "nlrd/serialization.hpp"

using namespace nlrd;

namespace {

json sample_problem() {
    return json::parse(R"({
        "alpha": 0.5, "beta": 3, "p": 0.5, "q": 1, "eps_reg": 1e-6,
        "kernel": {"profile": "truncated_gaussian", "radius": 0.2},
        "domain": {"bounds": [0, 2], "n": 50},
        "init_u": {"shape": "bump_f", "amplitude": 2, "eps_geom": 0.2},
        "init_v": {"shape": "bump_g", "amplitude": 10, "m": 0.3},
        "reaction": true
    })");
}

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("problem document round trip preserves content and digest") {
    const Problem pb = problem_from_json(sample_problem());
    CHECK(pb.params.beta == 3.0);
    CHECK(pb.params.kernel.profile == KernelProfile::TruncatedGaussian);
    CHECK(pb.params.domain.bounds[1] == 2.0);
    CHECK(pb.init_v.m == 0.3);
    const json once = problem_to_json(pb);
    const json twice = problem_to_json(problem_from_json(once));
    CHECK(once == twice);
    CHECK(digest(once) == digest(twice));
}

TEST_CASE("missing keys take defaults") {
    const Problem pb = problem_from_json(json::parse(R"({"alpha": 2, "beta": 2, "p": 1, "q": 1})"));
    const Problem def;
    CHECK(pb.params.domain.n == def.params.domain.n);
    CHECK(pb.params.kernel.radius == def.params.kernel.radius);
    CHECK(pb.diffusion);
}

TEST_CASE("unknown keys are listed with their dotted paths") {
    json doc = sample_problem();
    doc["bogus"] = 1;
    doc["kernel"]["wiggle"] = 2;
    doc["init_u"]["colour"] = "red";
    const auto keys = unknown_problem_keys(doc);
    CHECK(keys.size() == 3);
    const std::string msg = message_of([&] { problem_from_json(doc); });
    CHECK(msg.find("bogus") != std::string::npos);
    CHECK(msg.find("kernel.wiggle") != std::string::npos);
    CHECK(msg.find("init_u.colour") != std::string::npos);
    json pol = {{"t_max", 1}, {"dtmax", 2}};
    CHECK(unknown_policy_keys(pol) == std::vector<std::string>{"policy.dtmax"});
}

TEST_CASE("every type error is reported at once") {
    json doc = sample_problem();
    doc["alpha"] = "big";
    doc["domain"]["n"] = 1.5;
    doc["kernel"]["profile"] = "square";
    doc["reaction"] = 3;
    const std::string msg = message_of([&] { problem_from_json(doc); });
    for (const char* key : {"alpha", "domain.n", "kernel.profile", "reaction"}) {
        CHECK_MESSAGE(msg.find(key) != std::string::npos, key);
    }
}

TEST_CASE("invariant violations are all reported") {
    json doc = sample_problem();
    doc["alpha"] = -1;
    doc["q"] = 0;
    doc["kernel"]["radius"] = -0.1;
    const std::string msg = message_of([&] { problem_from_json(doc); });
    CHECK_FALSE(msg.empty());
    CHECK(msg.find("alpha") != std::string::npos);
    CHECK(msg.find("q") != std::string::npos);
    CHECK(msg.find("radius") != std::string::npos);
    CHECK_THROWS_AS(problem_from_json(json::array()), ValidationError);
}

TEST_CASE("policy round trip and validation") {
    StepPolicy p;
    p.t_max = 3.5;
    p.sample_every = 7;
    p.snapshot_interval = 0.25;
    const StepPolicy q = policy_from_json(policy_to_json(p));
    CHECK(q.t_max == 3.5);
    CHECK(q.sample_every == 7);
    CHECK(policy_to_json(q) == policy_to_json(p));
    CHECK_THROWS_AS(policy_from_json(json{{"t_max", -1}}), ValidationError);
    CHECK_THROWS_AS(policy_from_json(json{{"t_max", "long"}}), ValidationError);
}

TEST_CASE("trajectory CSV round trip") {
    Trajectory tr;
    double t = 0.0;
    for (std::size_t k = 0; k < 50; ++k) {
        const double dt = k == 0 ? 0.0 : 1e-3 / static_cast<double>(k);
        t += dt;
        tr.samples.push_back({t, 1.0 / (1.0 + 1e-9 - t), std::exp(t), 0.1 * static_cast<double>(k), 1e-300, dt, k});
    }
    const auto back = trajectory_from_csv(trajectory_to_csv(tr));
    REQUIRE(back.samples.size() == tr.samples.size());
    for (std::size_t k = 0; k < tr.samples.size(); ++k) {
        CHECK(back.samples[k].t == tr.samples[k].t);
        CHECK(back.samples[k].max_u == tr.samples[k].max_u);
        CHECK(back.samples[k].max_v == tr.samples[k].max_v);
        CHECK(back.samples[k].kaplan_v == tr.samples[k].kaplan_v);
        CHECK(back.samples[k].dt == tr.samples[k].dt);
        CHECK(back.samples[k].step == k);
    }
    CHECK(trajectory_to_csv(back) == trajectory_to_csv(tr));
}

TEST_CASE("malformed CSV reports the offending line") {
    const std::string header = "t,max_u,max_v,kaplan_u,kaplan_v,dt\n";
    CHECK(message_of([&] { trajectory_from_csv(""); }).find("empty") != std::string::npos);
    CHECK(message_of([&] { trajectory_from_csv("a,b\n0,1,1,1,1,0\n"); }).find("line 1") != std::string::npos);
    CHECK(message_of([&] { trajectory_from_csv(header + "0,1,1,1,1,0\n0.1,2,x,1,1,0.1\n"); }).find("line 3") !=
          std::string::npos);
    CHECK(message_of([&] { trajectory_from_csv(header + "0,1,1,1,1,0\n0.1,2,1,1\n"); }).find("line 3") !=
          std::string::npos);
    CHECK(message_of([&] { trajectory_from_csv(header + "0.2,1,1,1,1,0\n0.1,2,1,1,1,0.1\n"); }).find("line 3") !=
          std::string::npos);
}

TEST_CASE("manifest carries the classification, events, echoes and digest") {
    const Problem pb = problem_from_json(sample_problem());
    StepPolicy pol;
    pol.t_max = 0.01;
    RunResult r;
    r.classification = Classification::Global;
    r.trajectory.events.push_back({EventKind::ReachedTmax, 0.01, 0});
    r.trajectory.final_state.t = 0.01;
    r.verdicts["ordering"] = {true, 0.0};
    const json m = manifest_json(pb, pol, r);
    CHECK(m["classification"] == "Global");
    CHECK(m["T_u"].is_null());
    CHECK(m["events"][0]["kind"] == "ReachedTmax");
    CHECK(m["verdicts"]["ordering"]["satisfied"] == true);
    CHECK(m["problem"] == problem_to_json(pb));
    CHECK(m["policy"] == policy_to_json(pol));
    CHECK(m["problem_digest"] == digest(problem_to_json(pb)));
    CHECK(problem_to_json(problem_from_json(m["problem"])) == m["problem"]);
}

TEST_CASE("digest is stable, key-order independent and sensitive to values") {
    const json a = json::parse(R"({"x": 1, "y": [1, 2]})");
    const json b = json::parse(R"({"y": [1, 2], "x": 1})");
    const json c = json::parse(R"({"x": 1, "y": [2, 1]})");
    CHECK(digest(a) == digest(b));
    CHECK(digest(a) != digest(c));
    CHECK(digest(a).size() == 16);
    CHECK(digest(json::object()) == digest(json::object()));
}
