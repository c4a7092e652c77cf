#include <benchmark/benchmark.h>

#include "nlrd/dynamics.hpp"
#include "nlrd/operators.hpp"

using namespace nlrd;

namespace {

DomainSpec grid(int n) {
    DomainSpec d;
    d.n = n;
    return d;
}

KernelSpec tent() {
    KernelSpec k;
    k.radius = 0.2;
    return k;
}

}  // namespace

static void BM_AssembleNonlocal(benchmark::State& state) {
    const auto d = grid(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(assemble_nonlocal(d, tent()));
}
BENCHMARK(BM_AssembleNonlocal)->Arg(100)->Arg(400);

static void BM_ApplyNonlocal(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    const auto L = assemble_nonlocal(grid(n), tent());
    const Field u(static_cast<std::size_t>(n), 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(L.apply(u));
}
BENCHMARK(BM_ApplyNonlocal)->Arg(100)->Arg(400);

static void BM_ApplyLaplacian(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    const auto D = assemble_laplacian(grid(n));
    const Field u(static_cast<std::size_t>(n), 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(D.apply(u));
}
BENCHMARK(BM_ApplyLaplacian)->Arg(100)->Arg(400);

static void BM_PrincipalEigenpair(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    const auto L = assemble_nonlocal(grid(n), tent());
    for (auto _ : state) benchmark::DoNotOptimize(principal_eigenpair(L));
}
BENCHMARK(BM_PrincipalEigenpair)->Arg(100)->Arg(400);

static void BM_Step(benchmark::State& state) {
    Problem pb;
    pb.params.alpha = pb.params.beta = 2;
    pb.params.p = pb.params.q = 1;
    pb.params.domain.n = static_cast<int>(state.range(0));
    pb.init_u.shape = pb.init_v.shape = InitialShape::BumpG;
    auto ops = build_operators(pb.params);
    const Integrator integ(pb.params, ops, RhsOptions{}, StepPolicy{});
    const auto s0 = pb.initial_state();
    for (auto _ : state) benchmark::DoNotOptimize(step(s0, integ));
}
BENCHMARK(BM_Step)->Arg(100)->Arg(400);

static void BM_GlobalRun(benchmark::State& state) {
    Problem pb;
    pb.params.alpha = pb.params.beta = pb.params.p = pb.params.q = 0.5;
    pb.params.eps_reg = 1e-6;
    pb.params.domain.n = 40;
    pb.init_u.shape = pb.init_v.shape = InitialShape::BumpG;
    StepPolicy pol;
    pol.t_max = 5;
    for (auto _ : state) benchmark::DoNotOptimize(run(pb, pol));
}
BENCHMARK(BM_GlobalRun)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
