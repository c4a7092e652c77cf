#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nlrd/errors.hpp"
#include "nlrd/sweep.hpp"

using namespace nlrd;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nlrd_test_sweep_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SweepPlan grid_plan(const fs::path& dir) {
    SweepPlan plan;
    plan.axes = {{"alpha", {0.5, 1.5, 3}}, {"beta", {0.5, 1.5, 3}}};
    plan.base_problem = json::parse(R"({
        "p": 0.5, "q": 0.5, "eps_reg": 1e-6,
        "domain": {"n": 30},
        "init_u": {"shape": "bump_g", "amplitude": 1},
        "init_v": {"shape": "bump_g", "amplitude": 0.1}
    })");
    plan.policy.t_max = 5;
    plan.output_dir = dir.string();
    plan.parallelism = 2;
    return plan;
}

}  // namespace

TEST_CASE("a single-tuple sweep reproduces a direct run") {
    const auto dir = fresh_dir("single");
    SweepPlan plan = grid_plan(dir);
    plan.axes = {{"alpha", {0.5}}};
    const auto out = execute_sweep(plan);
    REQUIRE(out.table.size() == 1);
    CHECK(out.executed == 1);
    CHECK_FALSE(out.interrupted);

    auto [doc, pol] = sweep_point(plan, {0.5});
    CHECK(doc["alpha"] == 0.5);
    const Problem pb = problem_from_json(doc);
    const RunResult direct = run(pb, pol);
    CHECK(out.table[0].classification == direct.classification);
    CHECK(out.table[0].alpha == 0.5);
    CHECK(out.table[0].kappa == doctest::Approx(kappa(pb.params)));
    CHECK(fs::exists(dir / "runs" / (run_key(pb, pol) + ".json")));
    fs::remove_all(dir);
}

TEST_CASE("sweep over the exponent grid agrees with the global-existence prediction") {
    const auto dir = fresh_dir("grid");
    const auto out = execute_sweep(grid_plan(dir));
    CHECK(out.table.size() == 9);
    const auto rep = agreement_report(out.table);
    CHECK(rep.rows == 9);
    CHECK(rep.violations == 0);
    CHECK(rep.all_global_rows >= 1);
    for (const auto& r : out.table) {
        if (r.predicted == PredictedRegion::AllGlobal) CHECK(r.classification == Classification::Global);
        CHECK(r.agreement == (r.predicted != PredictedRegion::AllGlobal || r.classification == Classification::Global));
    }
    // sorted by tuple
    for (std::size_t i = 1; i < out.table.size(); ++i) CHECK(out.table[i - 1].tuple < out.table[i].tuple);
    fs::remove_all(dir);
}

TEST_CASE("re-executing a completed sweep runs nothing and rewrites an identical table") {
    const auto dir = fresh_dir("rerun");
    const auto plan = grid_plan(dir);
    const auto first = execute_sweep(plan);
    const std::string csv1 = slurp(first.phase_csv_path);
    const auto second = execute_sweep(plan);
    CHECK(second.executed == 0);
    CHECK(second.skipped == 9);
    CHECK(slurp(second.phase_csv_path) == csv1);
    CHECK(phase_csv(second.table) == csv1);
    fs::remove_all(dir);
}

TEST_CASE("an interrupted sweep resumes to the uninterrupted result") {
    const auto ref_dir = fresh_dir("ref");
    const auto ref = execute_sweep(grid_plan(ref_dir));

    const auto dir = fresh_dir("resume");
    SweepPlan plan = grid_plan(dir);
    plan.parallelism = 1;
    plan.stop_after = 4;
    const auto part = execute_sweep(plan);
    CHECK(part.interrupted);
    CHECK(part.executed == 4);
    CHECK(part.phase_csv_path.empty());
    CHECK_FALSE(fs::exists(dir / "phase.csv"));

    plan.stop_after = -1;
    const auto done = execute_sweep(plan);
    CHECK_FALSE(done.interrupted);
    CHECK(done.skipped == 4);
    CHECK(done.executed == 5);
    CHECK(slurp(done.phase_csv_path) == slurp(ref.phase_csv_path));
    fs::remove_all(dir);
    fs::remove_all(ref_dir);
}

TEST_CASE("corrupt manifests are re-run") {
    const auto dir = fresh_dir("corrupt");
    SweepPlan plan = grid_plan(dir);
    plan.axes = {{"alpha", {0.5, 3}}};
    execute_sweep(plan);
    for (const auto& e : fs::directory_iterator(dir / "runs")) {
        std::ofstream(e.path()) << "{ truncated";
        break;
    }
    const auto again = execute_sweep(plan);
    CHECK(again.executed == 1);
    CHECK(again.skipped == 1);
    fs::remove_all(dir);
}

TEST_CASE("agreement report flags a global-prediction row that blew up") {
    PhaseRecord ok;
    ok.predicted = PredictedRegion::AllGlobal;
    ok.classification = Classification::Global;
    PhaseRecord bad = ok;
    bad.classification = Classification::UBlowsUpOnly;
    bad.alpha = 0.25;
    PhaseRecord mixed;
    mixed.predicted = PredictedRegion::Mixed;
    mixed.classification = Classification::Simultaneous;
    PhaseRecord und;
    und.classification = Classification::Undetermined;
    const auto rep = agreement_report({ok, bad, mixed, und});
    CHECK(rep.rows == 4);
    CHECK(rep.all_global_rows == 2);
    CHECK(rep.violations == 1);
    REQUIRE(rep.violating.size() == 1);
    CHECK(rep.violating[0].alpha == 0.25);
    CHECK(rep.mixed_blowups == 1);
    CHECK(rep.undetermined == 1);
    CHECK_FALSE(rep.text.empty());
}

TEST_CASE("amplitude ladder: small data global, large data blows up sooner") {
    const auto dir = fresh_dir("ladder");
    SweepPlan plan = grid_plan(dir);
    plan.axes = {{"init_u.amplitude", {0.1, 1, 10, 100}}};
    plan.base_problem["alpha"] = 3;
    plan.base_problem["beta"] = 0.5;
    const auto out = execute_sweep(plan);
    REQUIRE(out.table.size() == 4);
    CHECK(out.table.front().classification == Classification::Global);
    CHECK(out.table.back().classification != Classification::Global);
    double prev = INFINITY;
    for (const auto& r : out.table) {
        if (r.T_u) {
            CHECK(*r.T_u <= prev);
            prev = *r.T_u;
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("plan documents round trip and invalid plans are rejected") {
    SweepPlan plan = grid_plan("x");
    plan.stop_after = 3;
    const SweepPlan back = plan_from_json(plan_to_json(plan));
    CHECK(plan_to_json(back) == plan_to_json(plan));
    CHECK(back.total_runs() == 9);

    SweepPlan bad = plan;
    bad.axes.push_back({"gamma", {1}});
    bad.parallelism = 0;
    bad.axes[0].values.clear();
    CHECK(bad.violations().size() >= 3);
    CHECK_THROWS_AS(execute_sweep(bad), ValidationError);
    CHECK_THROWS_AS(plan_from_json(json{{"axes", 3}}), ValidationError);
}

TEST_CASE("phase CSV header and row count") {
    PhaseRecord r;
    r.alpha = 1;
    const std::string csv = phase_csv({r, r});
    CHECK(csv.rfind("alpha,beta,p,q,amp_u,amp_v,kappa,predicted,class,T_u,T_v,exp_u,exp_v,agree\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
