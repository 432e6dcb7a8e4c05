#include <benchmark/benchmark.h>

#include <qkpz/coherence.hpp>
#include <qkpz/renorm.hpp>
#include <qkpz/rules.hpp>
#include <qkpz/tree_io.hpp>

using namespace qkpz;

static void BM_enumerate(benchmark::State& state) {
    EnumConfig cfg;
    cfg.noise_counts = {static_cast<int>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_negative(RuleSet{}, cfg));
}
BENCHMARK(BM_enumerate)->Arg(2)->Arg(3)->Arg(4);

static void BM_parse_render(benchmark::State& state) {
    const std::string text = "One[Ix(Xi),Ix(One[Ix(Xi),Ix(One[Ix(Xi),Ix(Xi)])])]";
    for (auto _ : state) benchmark::DoNotOptimize(render_tree(parse_tree(text)));
}
BENCHMARK(BM_parse_render);

static void BM_symmetry_factor(benchmark::State& state) {
    const TreePtr t = parse_tree("One[Ix(One[Ix(Xi),Ix(Xi)]),Ix(One[Ix(Xi),Ix(Xi)])]");
    for (auto _ : state) benchmark::DoNotOptimize(symmetry_factor(t));
}
BENCHMARK(BM_symmetry_factor);

static void BM_upsilon_Fhat(benchmark::State& state) {
    const TreePtr t = parse_tree("One[Ix(Xi),Ix(One[Ix(Xi),Ix(Xi[I{1}(Xi)])])]");
    for (auto _ : state) benchmark::DoNotOptimize(upsilon_Fhat(t));
}
BENCHMARK(BM_upsilon_Fhat);

static void BM_check_locality(benchmark::State& state) {
    const TreePtr thin = parse_tree("Xi[I(Xi)]");
    for (auto _ : state) benchmark::DoNotOptimize(check_locality(thin, xi_tree()));
}
BENCHMARK(BM_check_locality);

static void BM_expand_system(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(expand_system(n, n));
}
BENCHMARK(BM_expand_system)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_sector4_reduction(benchmark::State& state) {
    EnumConfig cfg;
    cfg.noise_counts = {4};
    const CountertermExpr raw =
        assemble_counterterm(parametrise(enumerate_negative(RuleSet{}, cfg), 1),
                             CountertermMode::FhatOverQ);
    for (auto _ : state) {
        const ConstraintTable table = chain_rule_constraints(4);
        benchmark::DoNotOptimize(reduce_to_local(raw, table));
    }
}
BENCHMARK(BM_sector4_reduction)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
