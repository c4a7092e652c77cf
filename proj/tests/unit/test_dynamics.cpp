#include <doctest.h>

#include <cmath>
#include <random>

#include "nlrd/dynamics.hpp"
#include "nlrd/errors.hpp"
#include "nlrd/linalg.hpp"
#include "nlrd/verifiers.hpp"
#include "oracles.hpp"

using namespace nlrd;

namespace {

Problem base_problem(double a, double b, double p, double q, int n = 40) {
    Problem pb;
    pb.params.alpha = a;
    pb.params.beta = b;
    pb.params.p = p;
    pb.params.q = q;
    pb.params.eps_reg = std::min({a, b, p, q}) < 1 ? 1e-6 : 0.0;
    pb.params.domain.n = n;
    return pb;
}

InitialDataSpec shape(InitialShape s, double amp, double m = 0.5) {
    InitialDataSpec d;
    d.shape = s;
    d.amplitude = amp;
    d.m = m;
    return d;
}

void check_trajectory_invariants(const Trajectory& tr) {
    for (std::size_t k = 1; k < tr.samples.size(); ++k) CHECK(tr.samples[k].t > tr.samples[k - 1].t);
    for (const auto& s : tr.samples) {
        CHECK(std::isfinite(s.max_u));
        CHECK(std::isfinite(s.max_v));
    }
    CHECK(tr.clamp_count() == 0);
}

}  // namespace

TEST_CASE("regularized power examples") {
    CHECK(regularized_power(0.25, 0.5, 0.1) == doctest::Approx(0.5));
    CHECK(regularized_power(0.05, 0.5, 0.1) == doctest::Approx(0.316227766).epsilon(1e-9));
    for (double eps : {1e-3, 0.1, 0.7}) {
        for (double g : {0.0, 0.5, 2.0}) {
            CHECK(regularized_power(eps, g, eps) == std::pow(eps, g));
            CHECK(regularized_power(eps * (1 - 1e-12), g, eps) == std::pow(eps, g));
        }
    }
    CHECK(regularized_power(0.3, 1.7, 0.0) == std::pow(0.3, 1.7));
}

TEST_CASE("regularized power is nondecreasing and continuous in w") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> U(0.0, 2.0);
    for (int k = 0; k < 500; ++k) {
        const double g = U(gen), eps = 0.5 * U(gen), w1 = U(gen), w2 = w1 + U(gen);
        CHECK(regularized_power(w1, g, eps) <= regularized_power(w2, g, eps));
        CHECK(std::abs(regularized_power(w1 + 1e-9, g, eps) - regularized_power(w1, g, eps)) < 1e-6);
    }
}

TEST_CASE("rhs examples") {
    Problem pb = base_problem(2, 2, 1, 1, 10);
    auto ops = build_operators(pb.params);
    CoupledState zero{0.0, Field(10, 0.0), Field(10, 0.0)};
    auto [ru, rv] = rhs(zero, pb.params, ops->nonlocal, ops->laplacian);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(ru[i] == 0.0);
        CHECK(rv[i] == 0.0);
    }
    for (double a : {0.3, 1.0, 4.0}) {
        Problem q = base_problem(a, 2.5, 0.7, 3, 10);
        q.params.eps_reg = 0.0;
        CoupledState ones{0.0, Field(10, 1.0), Field(10, 1.0)};
        RhsOptions off;
        off.diffusion = false;
        auto [fu, fv] = rhs(ones, q.params, ops->nonlocal, ops->laplacian, off);
        for (std::size_t i = 0; i < 10; ++i) {
            CHECK(fu[i] == 1.0);
            CHECK(fv[i] == 1.0);
        }
    }
}

TEST_CASE("rhs on the n = 3 tabulated instance matches a scalar brute force") {
    Problem pb = base_problem(2, 2, 1, 1, 3);
    pb.params.eps_reg = 0.01;
    pb.params.kernel.radius = 0.5;
    auto ops = build_operators(pb.params);
    CoupledState s{0.0, {1, 0, 0}, {0, 1, 0}};
    auto [ru, rv] = rhs(s, pb.params, ops->nonlocal, ops->laplacian);
    const Eigen::MatrixXd L = oracle::nonlocal_tent(0, 1, 3, 0.5);
    const Eigen::MatrixXd D = oracle::laplacian(0, 1, 3);
    auto f = [](double w, double g) { return std::pow(std::max(w, 0.01), g); };
    for (int i = 0; i < 3; ++i) {
        double lu = 0, dv = 0;
        for (int j = 0; j < 3; ++j) {
            lu += L(i, j) * s.u[static_cast<std::size_t>(j)];
            dv += D(i, j) * s.v[static_cast<std::size_t>(j)];
        }
        const auto k = static_cast<std::size_t>(i);
        CHECK(ru[k] == doctest::Approx(lu + f(s.u[k], 2) * f(s.v[k], 1)).epsilon(1e-14));
        CHECK(rv[k] == doctest::Approx(dv + f(s.u[k], 1) * f(s.v[k], 2)).epsilon(1e-14));
    }
    // pinned values
    CHECK(ru[0] == doctest::Approx(-0.49));
    CHECK(ru[1] == doctest::Approx(0.2501));
    CHECK(rv[1] == doctest::Approx(-31.99));
    CHECK(rv[2] == doctest::Approx(16.000001));
}

TEST_CASE("rhs rejects mismatched fields") {
    Problem pb = base_problem(2, 2, 1, 1, 10);
    auto ops = build_operators(pb.params);
    CoupledState bad{0.0, Field(9, 0.0), Field(10, 0.0)};
    CHECK_THROWS_AS(rhs(bad, pb.params, ops->nonlocal, ops->laplacian), ContractViolation);
}

TEST_CASE("zero state is a fixed point of the stepper") {
    Problem pb = base_problem(2, 2, 1, 1, 20);
    auto ops = build_operators(pb.params);
    Integrator in(pb.params, ops, {}, StepPolicy{});
    CoupledState s{0.0, Field(20, 0.0), Field(20, 0.0)};
    for (int k = 0; k < 5; ++k) {
        auto r = step(s, in);
        CHECK(r.dt > 0.0);
        for (std::size_t i = 0; i < 20; ++i) {
            CHECK(r.state.u[i] == 0.0);
            CHECK(r.state.v[i] == 0.0);
        }
        s = r.state;
    }
}

// Euler lags the singular time by O(eta), so the error is measured as the
// time at which the exact solution reaches the computed value: 1 - 1/u_n
// against t_n.
TEST_CASE("scalar mode reproduces u = 1/(1 - t) up to u = 1e6") {
    Problem pb = base_problem(2, 1, 0, 0, 5);
    pb.params.kernel.radius = 0.5;
    pb.diffusion = false;
    pb.init_u = shape(InitialShape::Constant, 1.0);
    pb.init_v = shape(InitialShape::Constant, 1.0);
    StepPolicy pol;
    pol.reaction_target = 5e-4;
    pol.t_max = 2;
    double worst = 0.0;
    std::size_t seen = 0;
    auto obs = [&](std::size_t, const CoupledState&, const CoupledState& after, double) {
        if (after.u[0] <= 1e6) {
            worst = std::max(worst, std::abs(1.0 / after.u[0] - (1.0 - after.t)));
            ++seen;
        }
    };
    const auto r = run(pb, pol, obs);
    CHECK(seen > 1000);
    CHECK(worst <= 1e-3);
    REQUIRE(r.T_u.has_value());
    CHECK(*r.T_u == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(*r.exponent_u == doctest::Approx(-1.0).epsilon(0.05));
}

TEST_CASE("flat mode matches an independent RK4 integration of the ODE system") {
    Problem pb = base_problem(1.5, 1.2, 0.5, 0.7, 5);
    pb.params.kernel.radius = 0.5;
    pb.diffusion = false;
    pb.init_u = shape(InitialShape::Constant, 0.5);
    pb.init_v = shape(InitialShape::Constant, 0.3);
    StepPolicy pol;
    pol.t_max = 1.5;
    pol.dt_max = 1e-4;
    const auto r = run(pb, pol);
    REQUIRE(r.classification == Classification::Global);
    const auto ref = oracle::rk4(
        [](const std::vector<double>& y) {
            return std::vector<double>{std::pow(y[0], 1.5) * std::pow(y[1], 0.5), std::pow(y[0], 0.7) * std::pow(y[1], 1.2)};
        },
        {0.5, 0.3}, 1.5, 20000);
    const auto& fin = r.trajectory.final_state;
    CHECK(fin.t == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(std::abs(fin.u[2] - ref[0]) / ref[0] <= 1e-3);
    CHECK(std::abs(fin.v[2] - ref[1]) / ref[1] <= 1e-3);
}

TEST_CASE("ordered data stay ordered at every shared step") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        Problem lo = base_problem(1 + U(gen), 1 + U(gen), 1 + U(gen), 1 + U(gen), 30);
        lo.init_u.shape = lo.init_v.shape = InitialShape::Custom;
        lo.init_u.values.resize(30);
        lo.init_v.values.resize(30);
        Problem hi = lo;
        for (std::size_t i = 0; i < 30; ++i) {
            lo.init_u.values[i] = U(gen);
            lo.init_v.values[i] = U(gen);
            hi.init_u.values[i] = lo.init_u.values[i] + U(gen);
            hi.init_v.values[i] = lo.init_v.values[i] + U(gen);
        }
        StepPolicy pol;
        pol.t_max = 0.2;
        CoupledState last0;
        double worst = 0.0;
        std::size_t pairs = 0;
        auto obs = [&](std::size_t member, const CoupledState&, const CoupledState& after, double) {
            if (member == 0) {
                last0 = after;
                return;
            }
            if (after.t != last0.t) return;
            ++pairs;
            for (std::size_t i = 0; i < 30; ++i) {
                worst = std::max({worst, last0.u[i] - after.u[i], last0.v[i] - after.v[i]});
            }
        };
        const std::vector<Problem> members{lo, hi};
        run_ensemble(members, pol, nullptr, obs);
        CHECK(pairs > 10);
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("run examples and classification consistency") {
    SUBCASE("all-global region") {
        Problem pb = base_problem(0.5, 0.5, 0.5, 0.5);
        pb.init_u = shape(InitialShape::BumpG, 10);
        pb.init_v = shape(InitialShape::BumpG, 10);
        StepPolicy pol;
        pol.t_max = 50;
        const auto r = run(pb, pol);
        CHECK(r.classification == Classification::Global);
        CHECK(r.trajectory.has_event(EventKind::ReachedTmax));
        CHECK(r.max_u < pol.blowup_threshold);
        check_trajectory_invariants(r.trajectory);
    }
    SUBCASE("u blows up alone") {
        Problem pb = base_problem(3, 0.5, 0.5, 0.5);
        pb.params.kernel.radius = 0.15;
        pb.init_u = shape(InitialShape::BumpF, 20);
        pb.init_v = shape(InitialShape::BumpG, 1);
        StepPolicy pol;
        pol.t_max = 5;
        const auto r = run(pb, pol);
        CHECK(r.classification == Classification::UBlowsUpOnly);
        CHECK(r.trajectory.has_event(EventKind::UThresholdCrossed));
        CHECK(r.max_v <= pol.bounded_level());
        check_trajectory_invariants(r.trajectory);
    }
    SUBCASE("v blows up alone") {
        Problem pb = base_problem(0.5, 3, 1, 0.5);
        pb.params.kernel.radius = 0.15;
        pb.init_u = shape(InitialShape::BumpF, 1);
        pb.init_v = shape(InitialShape::BumpG, 10);
        StepPolicy pol;
        pol.t_max = 5;
        const auto r = run(pb, pol);
        CHECK(r.classification == Classification::VBlowsUpOnly);
        CHECK(r.trajectory.has_event(EventKind::VThresholdCrossed));
        CHECK(r.max_u <= pol.bounded_level());
        check_trajectory_invariants(r.trajectory);
    }
}

TEST_CASE("a run cut short by the step cap is Undetermined with a diagnostic") {
    Problem pb = base_problem(0.5, 0.5, 0.5, 0.5, 20);
    StepPolicy pol;
    pol.max_steps = 10;
    const auto r = run(pb, pol);
    CHECK(r.classification == Classification::Undetermined);
    CHECK_FALSE(r.diagnostics.empty());
}

TEST_CASE("policy invariants") {
    StepPolicy pol;
    CHECK(pol.violations().empty());
    CHECK(pol.bounded_level() == doctest::Approx(1e4));
    pol.blowup_threshold = 10;
    pol.cfl_safety = 1.5;
    pol.t_max = -1;
    CHECK(pol.violations().size() >= 3);
}

TEST_CASE("monotone data keep u_t - delta1 u^alpha and v_t - delta2 v^beta nonnegative") {
    Problem pb = base_problem(3, 0.5, 0.5, 0.5);
    pb.params.kernel.radius = 0.15;
    pb.init_u = shape(InitialShape::BumpF, 100);
    pb.init_v = shape(InitialShape::BumpG, 1, 0.01);
    auto ops = build_operators(pb.params);
    const auto s0 = pb.initial_state();
    const auto res = verify_monotone_data(s0.u, s0.v, pb.params, ops->nonlocal, ops->laplacian, 0.05, 1e-3);
    REQUIRE(res.satisfied());
    MonotoneTracker tr(pb.params, 0.05, 1e-3);
    StepPolicy pol;
    pol.t_max = 5;
    run(pb, pol, ops, tr.observer());
    CHECK(tr.steps() > 100);
    CHECK(tr.holds(1e-6));
}

TEST_CASE("continuation: a one-level schedule is the shifted run") {
    Problem pb = base_problem(0.5, 0.5, 2, 2, 30);
    pb.init_u = shape(InitialShape::BumpF, 1);
    pb.init_v = shape(InitialShape::BumpG, 1);
    StepPolicy pol;
    pol.t_max = 0.5;
    pol.snapshot_interval = 0.01;
    const auto rep = maximal_continuation(pb, {1e-3}, pol);
    const auto direct = run(regularized_problem(pb, 1e-3), pol);
    REQUIRE(rep.runs.size() == 1);
    CHECK(rep.distances.empty());
    const auto& a = rep.runs[0].trajectory.final_state;
    const auto& b = direct.trajectory.final_state;
    CHECK(a.t == b.t);
    for (std::size_t i = 0; i < a.u.size(); ++i) {
        CHECK(a.u[i] == b.u[i]);
        CHECK(a.v[i] == b.v[i]);
    }
    const auto reg = regularized_problem(pb, 1e-3);
    CHECK(reg.params.eps_reg == 1e-3);
    CHECK(reg.data_shift == 1e-3);
    CHECK(reg.exterior_value == 1e-3);
}

TEST_CASE("continuation in the Lipschitz case converges at rate O(eps) with ordered members") {
    Problem pb = base_problem(1, 1, 1, 1, 30);
    pb.init_u = shape(InitialShape::BumpG, 1);
    pb.init_v = shape(InitialShape::BumpG, 1);
    StepPolicy pol;
    pol.t_max = 0.5;
    const auto rep = maximal_continuation(pb, {1e-2, 5e-3, 2.5e-3}, pol);
    REQUIRE(rep.distances.size() == 2);
    // distance ~ C eps: halving eps halves the distance
    CHECK(rep.distances[1] / rep.distances[0] == doctest::Approx(0.5).epsilon(0.1));
    CHECK(rep.distances[1] / 5e-3 == doctest::Approx(rep.distances[0] / 1e-2).epsilon(0.1));
    CHECK(rep.ordering_violation <= 1e-12);
    CHECK(rep.shared_snapshots > 10);
}

TEST_CASE("continuation rejects bad schedules") {
    Problem pb = base_problem(1, 1, 1, 1, 20);
    CHECK_THROWS_AS(maximal_continuation(pb, {}, StepPolicy{}), ContractViolation);
    CHECK_THROWS_AS(maximal_continuation(pb, {1e-3, 1e-2}, StepPolicy{}), ContractViolation);
    CHECK_THROWS_AS(maximal_continuation(pb, {1e-3, 0.0}, StepPolicy{}), ContractViolation);
}
