#include <benchmark/benchmark.h>

#include "bhl/kripke.hpp"
#include "bhl/proof.hpp"
#include "bhl/stats.hpp"
#include "bhl/wp.hpp"

#include <filesystem>
#include <random>
#include <string>

using namespace bhl;

namespace {

std::filesystem::path corpus(const char* f) { return std::filesystem::path(BHL_CORPUS_DIR) / f; }

Value normal_sample(std::mt19937_64& rng, std::int64_t n) {
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> xs(static_cast<size_t>(n));
    for (auto& x : xs) x = d(rng);
    return Value::reals(xs);
}

} // namespace

static void ZTestPValue(benchmark::State& state) {
    Decls d;
    parse_header_into("test z = Z(two, sigma = 1.0);", d);
    std::mt19937_64 rng(1);
    Value data = Value::tuple({normal_sample(rng, state.range(0)), normal_sample(rng, state.range(0))});
    for (auto _ : state) benchmark::DoNotOptimize(stats::p_value(d, "z", data).value);
    state.SetComplexityN(state.range(0));
}
BENCHMARK(ZTestPValue)->RangeMultiplier(4)->Range(8, 8 << 10)->Complexity();

static void DisjunctivePValue(benchmark::State& state) {
    Decls d;
    parse_header_into("test z = Z(two, sigma = 1.0); test zz = or(z, z);", d);
    std::mt19937_64 rng(2);
    auto pair = [&] { return Value::tuple({normal_sample(rng, 10), normal_sample(rng, 10)}); };
    Value data = Value::tuple({pair(), pair()});
    for (auto _ : state) benchmark::DoNotOptimize(stats::p_value(d, "zz", data).value);
}
BENCHMARK(DisjunctivePValue);

static void WeakestPreconditionChain(benchmark::State& state) {
    Source s = parse_source(R"(observable y, z : list(real);
observable x : int;
observable r : prob;
invisible mu : real;
test B = Z(two, sigma = 1.0, pop = (N(mu, 1.0), N(0.0, 1.0)), alt: mu != 0.0);
)");
    std::string prog = "r := B(y, z)";
    for (std::int64_t i = 0; i < state.range(0); ++i)
        prog += "; if r <= 0.05 { x := x + 1 } else { x := x - 1 }";
    CmdP c = parse_program(prog, s.decls);
    register_histories(c, s.decls);
    FormP post = parse_formula("Belief[<= 0.05; (y, z); B] alt[B] and x >= 0", s.decls);
    for (auto _ : state) benchmark::DoNotOptimize(weakest_pre(s.decls, c, post));
}
// each conditional duplicates the postcondition, so the cost is exponential in the chain length
BENCHMARK(WeakestPreconditionChain)->DenseRange(1, 9, 2);

static void BuildDrugModel(benchmark::State& state) {
    Scenario sc = load_scenario(corpus("drugs.scn"));
    for (auto _ : state) benchmark::DoNotOptimize(build_model(sc).worlds.size());
}
BENCHMARK(BuildDrugModel)->Unit(benchmark::kMillisecond);

static void CheckValidBelief(benchmark::State& state) {
    Model m = build_model(load_scenario(corpus("drugs.scn")));
    FormP phi = parse_formula("kappa{(y1, y2) : z12} -> Belief[= z12(y1, y2); (y1, y2); z12] alt[z12]", m.decls);
    for (auto _ : state) benchmark::DoNotOptimize(check_valid(m, phi).ok);
}
BENCHMARK(CheckValidBelief);

static void DecideSchemata(benchmark::State& state) {
    ProofScript s = load_proof_script(corpus("c_drug.bhl"));
    FormP phi = parse_formula("K (mu1 = mu2 -> mu1 = mu3) and P mu1 = mu2 -> P mu1 = mu3 and not K not kappa{}",
                              s.decls);
    SchemaSet all = SchemaSet::all();
    for (auto _ : state) benchmark::DoNotOptimize(prove(s.decls, phi, all));
}
BENCHMARK(DecideSchemata);

static void CheckProof(benchmark::State& state) {
    static const char* files[] = {"c_drug.bhl", "c_multi.bhl", "ztest.bhl", "lrt.bhl"};
    ProofScript s = load_proof_script(corpus(files[state.range(0)]));
    state.SetLabel(files[state.range(0)]);
    for (auto _ : state) benchmark::DoNotOptimize(check_proof(s).accepted);
}
BENCHMARK(CheckProof)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
