#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <pagbound/bound.hpp>
#include <pagbound/dist.hpp>
#include <pagbound/graph.hpp>

namespace testsupport {

// Two inseparable variables; the bound on P_b(x) recovers the natural bounds.
inline pagbound::MixedGraph pair_pag() {
    return pagbound::parse_graph_text("node B\nnode X\nB o-o X\n");
}

// Five-node hub: two circle parents into X, two visible edges out of X, and
// a circle-circle edge closing the C/D bucket.
inline pagbound::MixedGraph hub5_pag() {
    return pagbound::parse_graph_text(
        "node A\nnode B\nnode X\nnode C\nnode D\n"
        "A o-> X\nB o-> X\nX --> C\nX --> D\nC o-o D\n");
}

// A diagram whose equivalence class is summarized by hub5_pag.
inline pagbound::MixedGraph hub5_diagram() {
    return pagbound::parse_graph_text(
        "kind diagram\nnode A\nnode B\nnode X\nnode C\nnode D\n"
        "A --> X\nB --> X\nB <-> X\nX --> C\nX --> D\nD --> C\nD <-> C\n");
}

// Five-node chain with two circle parents into X and an invisible Z --> Y.
inline pagbound::MixedGraph chain5_pag() {
    return pagbound::parse_graph_text(
        "node W\nnode Z\nnode X\nnode Y\nnode S\n"
        "W o-> X\nZ o-> X\nZ --> Y\nX --> Y\nY --> S\n");
}

// Protein-signalling PAG over the six pathway variables.
inline pagbound::MixedGraph sachs_pag() {
    return pagbound::parse_graph_text(
        "node PKC\nnode PKA\nnode RAF\nnode MEK\nnode ERK\nnode AKT\n"
        "PKC o-> RAF\nRAF --> MEK\nMEK --> ERK\nPKA o-> ERK\nPKA o-> AKT\nPKA o-> RAF\n");
}

// Consensus signalling network as a plain causal diagram.
inline pagbound::MixedGraph sachs_consensus_diagram() {
    return pagbound::parse_graph_text(
        "kind diagram\nnode PKC\nnode PKA\nnode RAF\nnode MEK\nnode ERK\nnode AKT\n"
        "PKC --> RAF\nRAF --> MEK\nMEK --> ERK\nPKA --> ERK\nPKA --> AKT\nPKA --> RAF\n");
}

// Six-node treatment/disease PAG, every edge a circle arrow.
inline pagbound::MixedGraph lung_pag() {
    return pagbound::parse_graph_text(
        "node C\nnode L\nnode D\nnode T\nnode A\nnode P\n"
        "C o-> L\nL o-> D\nT o-> D\nA o-> L\nA o-> D\nP o-> D\nC o-> D\n");
}

// Treatment/disease consensus diagram with one latent confounder.
inline pagbound::MixedGraph lung_diagram() {
    return pagbound::parse_graph_text(
        "kind diagram\nnode C\nnode L\nnode D\nnode T\nnode A\nnode P\n"
        "C --> L\nL --> D\nT --> D\nA --> L\nA --> D\nP --> D\nL <-> D\n");
}

// Collider MAG with two invisible directed edges; its class has one maximal
// confounding completion carrying both bidirected companions.
inline pagbound::MixedGraph collider_leg() {
    return pagbound::parse_graph_text("kind mag\nX --> Y\nZ --> Y\n");
}

inline pagbound::MixedGraph collider_mbd() {
    return pagbound::parse_graph_text(
        "kind diagram\nX --> Y\nZ --> Y\nX <-> Y\nZ <-> Y\n");
}

// Diamond MAG: the root edges are invisible, the edges into Y are visible,
// and exactly one root companion can be added at a time.
inline pagbound::MixedGraph diamond_leg() {
    return pagbound::parse_graph_text(
        "kind mag\nnode X\nnode W\nnode V\nnode Y\n"
        "X --> W\nX --> V\nW --> Y\nV --> Y\n");
}

// Two-child fork; adding a companion on one child edge excludes the other.
inline pagbound::MixedGraph fork_leg() {
    return pagbound::parse_graph_text("kind mag\nnode X\nnode Y1\nnode Y2\nX --> Y1\nX --> Y2\n");
}

inline pagbound::MixedGraph fork_mbd_first() {
    return pagbound::parse_graph_text(
        "kind diagram\nnode X\nnode Y1\nnode Y2\nX --> Y1\nX --> Y2 v\nX <-> Y1\n");
}

inline pagbound::Assignment make_assignment(
    const pagbound::MixedGraph& g,
    std::initializer_list<std::pair<const char*, int>> entries) {
    pagbound::Assignment a = pagbound::Assignment::empty(g);
    for (const auto& [name, value] : entries) a.set(g.node_id(name), value);
    return a;
}

// Strictly positive joint table with Dirichlet(1) cell weights.
inline pagbound::DiscreteDistribution random_table(std::vector<pagbound::Variable> vars,
                                                   std::uint64_t seed) {
    std::size_t cells = 1;
    for (const auto& v : vars) cells *= static_cast<std::size_t>(v.card);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> table(cells);
    double total = 0.0;
    for (double& cell : table) {
        cell = -std::log(1.0 - unit(rng));
        total += cell;
    }
    for (double& cell : table) cell /= total;
    return pagbound::DiscreteDistribution(std::move(vars), std::move(table));
}

// Binary variables named after the graph nodes, in node-id order.
inline std::vector<pagbound::Variable> binary_vars(const pagbound::MixedGraph& g, int card = 2) {
    std::vector<pagbound::Variable> vars;
    for (int v = 0; v < g.node_count(); ++v) vars.push_back({g.node_name(v), card});
    return vars;
}

}  // namespace testsupport
