#include <cstdint>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include <pagbound/bound.hpp>
#include <pagbound/enumerate.hpp>
#include <pagbound/oracle.hpp>

using namespace pagbound;

namespace {

MixedGraph signalling_pag() {
    return parse_graph_text(
        "node PKC\nnode PKA\nnode RAF\nnode MEK\nnode ERK\nnode AKT\n"
        "PKC o-> RAF\nRAF --> MEK\nMEK --> ERK\nPKA o-> ERK\nPKA o-> AKT\nPKA o-> RAF\n");
}

MixedGraph chain_pag() {
    return parse_graph_text(
        "node W\nnode Z\nnode X\nnode Y\nnode S\n"
        "W o-> X\nZ o-> X\nZ --> Y\nX --> Y\nY --> S\n");
}

MixedGraph diamond_mag() {
    return parse_graph_text(
        "kind mag\nnode X\nnode W\nnode V\nnode Y\n"
        "X --> W\nX --> V\nW --> Y\nV --> Y\n");
}

MixedGraph chain_diagram(int n) {
    std::string text = "kind diagram\n";
    for (int i = 0; i < n; ++i) text += "node V" + std::to_string(i) + "\n";
    for (int i = 0; i + 1 < n; ++i)
        text += "V" + std::to_string(i) + " --> V" + std::to_string(i + 1) + "\n";
    return parse_graph_text(text);
}

DiscreteDistribution random_binary_table(const MixedGraph& g, std::uint64_t seed) {
    std::vector<Variable> vars;
    for (int v = 0; v < g.node_count(); ++v) vars.push_back({g.node_name(v), 2});
    size_t cells = size_t{1} << g.node_count();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> table(cells);
    double total = 0.0;
    for (double& c : table) total += c = -std::log(1.0 - unif(rng));
    for (double& c : table) c /= total;
    return DiscreteDistribution(std::move(vars), std::move(table));
}

void BM_MSeparation(benchmark::State& state) {
    MixedGraph g = signalling_pag();
    for (auto _ : state) {
        int verdicts = 0;
        for (int x = 0; x < g.node_count(); ++x)
            for (int y = x + 1; y < g.node_count(); ++y)
                verdicts += m_separated(g, ns_bit(x), ns_bit(y), 0) ? 1 : 0;
        benchmark::DoNotOptimize(verdicts);
    }
}
BENCHMARK(BM_MSeparation);

void BM_SymbolicBounds(benchmark::State& state) {
    MixedGraph g = signalling_pag();
    NodeSet x = ns_bit(g.node_id("PKC"));
    NodeSet y = ns_bit(g.node_id("RAF")) | ns_bit(g.node_id("MEK")) | ns_bit(g.node_id("ERK"));
    for (auto _ : state) {
        detail::SymbolicBounds sb = detail::symbolic_effect_bounds(g, x, y);
        benchmark::DoNotOptimize(sb.lower.get());
    }
}
BENCHMARK(BM_SymbolicBounds);

void BM_PartialIdp(benchmark::State& state) {
    MixedGraph g = chain_pag();
    DiscreteDistribution d = random_binary_table(g, 17);
    Assignment x = Assignment::empty(g);
    x.set(g.node_id("X"), 1);
    x.set(g.node_id("W"), 0);
    x.set(g.node_id("Z"), 1);
    Assignment y = Assignment::empty(g);
    y.set(g.node_id("Y"), 1);
    for (auto _ : state) {
        BoundReport r = partial_idp(g, x, y, d);
        benchmark::DoNotOptimize(r.interval.lo);
    }
}
BENCHMARK(BM_PartialIdp);

void BM_EnumerateLegs(benchmark::State& state) {
    MixedGraph seed = representative_mag(signalling_pag());
    for (auto _ : state) {
        std::vector<MixedGraph> legs = enumerate_legs(seed);
        benchmark::DoNotOptimize(legs.size());
    }
}
BENCHMARK(BM_EnumerateLegs);

void BM_EnumerateMbd(benchmark::State& state) {
    MixedGraph leg = diamond_mag();
    for (auto _ : state) {
        std::vector<MixedGraph> mbds = enumerate_mbd(leg);
        benchmark::DoNotOptimize(mbds.size());
    }
}
BENCHMARK(BM_EnumerateMbd);

void BM_ObservationalDistribution(benchmark::State& state) {
    MixedGraph diagram = chain_diagram(static_cast<int>(state.range(0)));
    std::vector<int> domains(static_cast<size_t>(diagram.node_count()), 2);
    Scm m = random_scm(diagram, domains, 4, 23);
    for (auto _ : state) {
        DiscreteDistribution d = observational_distribution(m);
        benchmark::DoNotOptimize(d.table().data());
    }
}
BENCHMARK(BM_ObservationalDistribution)->Arg(4)->Arg(6)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
