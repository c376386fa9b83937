#include "pagbound/enumerate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <random>
#include <sstream>

#include "pagbound/dist.hpp"

namespace pagbound {

namespace {

constexpr int kWitnessAttempts = 64;
constexpr double kWitnessGap = 0.01;

NodeSet definite_parents(const MixedGraph& g, int v) {
    NodeSet out = 0;
    for (const Edge& e : g.edges()) {
        if (e.touches(v) && e.directed_into(v)) out |= ns_bit(e.tail_node());
    }
    return out;
}

NodeSet definite_spouses(const MixedGraph& g, int v) {
    NodeSet out = 0;
    for (const Edge& e : g.edges()) {
        if (e.touches(v) && e.bidirected()) out |= ns_bit(e.other(v));
    }
    return out;
}

MixedGraph with_reversed_edge(const MixedGraph& g, int index) {
    MixedGraph out = g;
    Edge& e = out.edges()[static_cast<size_t>(index)];
    const int tail = e.tail_node();
    const int head = e.head_node();
    e.set_mark_at(tail, Mark::Arrow);
    e.set_mark_at(head, Mark::Tail);
    e.visible = false;
    annotate_visible_edges(out);
    return out;
}

MixedGraph validated_mag(const MixedGraph& seed) {
    MixedGraph g = seed;
    g.set_kind(GraphKind::Mag);
    validate_graph(g);
    annotate_visible_edges(g);
    return g;
}

double rnd01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<std::uint64_t> separation_fingerprint(const MixedGraph& g) {
    const int n = g.node_count();
    std::vector<std::uint64_t> bits;
    int pos = 0;
    auto push_bit = [&](bool b) {
        if (pos % 64 == 0) bits.push_back(0);
        if (b) bits.back() |= std::uint64_t{1} << (pos % 64);
        ++pos;
    };
    for (int x = 0; x < n; ++x) {
        for (int y = x + 1; y < n; ++y) {
            const NodeSet rest = g.all_nodes() & ~ns_bit(x) & ~ns_bit(y);
            NodeSet z = 0;
            do {
                push_bit(m_separated(g, ns_bit(x), ns_bit(y), z));
                z = (z - rest) & rest;
            } while (z);
        }
    }
    return bits;
}

std::string canonical_edge_list(const MixedGraph& g) {
    NodeSet touched = 0;
    for (const Edge& e : g.edges()) touched |= ns_bit(e.a) | ns_bit(e.b);
    std::istringstream in(graph_to_text(g));
    std::string line, out;
    while (std::getline(in, line)) {
        if (line.rfind("kind ", 0) == 0 || line.rfind("node ", 0) == 0) continue;
        if (!out.empty()) out += "; ";
        out += line;
    }
    ns_for_each(g.all_nodes() & ~touched, [&](int v) {
        if (!out.empty()) out += "; ";
        out += g.node_name(v);
    });
    return out;
}

bool legal_reversal(const MixedGraph& g, int x, int y) {
    const int index = g.edge_between(x, y);
    if (index < 0)
        throw EdgeNotFound("no edge between " + g.node_name(x) + " and " + g.node_name(y));
    const Edge& e = g.edges()[static_cast<size_t>(index)];
    if (!e.directed() || e.head_node() != y)
        throw EdgeNotFound("no directed edge " + g.node_name(x) + " -> " + g.node_name(y));
    if (e.visible)
        throw VisibleEdge("cannot reverse the visible edge " + g.node_name(x) + " -> " +
                          g.node_name(y));
    if (definite_parents(g, x) != (definite_parents(g, y) & ~ns_bit(x))) return false;
    if ((definite_spouses(g, x) & ~ns_bit(y)) != (definite_spouses(g, y) & ~ns_bit(x)))
        return false;
    MixedGraph reversed = with_reversed_edge(g, index);
    try {
        validate_graph(reversed);
    } catch (const Error&) {
        return false;
    }
    return separation_fingerprint(reversed) == separation_fingerprint(g);
}

std::vector<MixedGraph> enumerate_legs(const MixedGraph& seed) {
    const MixedGraph start = validated_mag(seed);
    std::map<std::string, MixedGraph> visited;
    std::deque<MixedGraph> queue;
    visited.emplace(canonical_edge_list(start), start);
    queue.push_back(start);
    while (!queue.empty()) {
        const MixedGraph g = std::move(queue.front());
        queue.pop_front();
        for (size_t i = 0; i < g.edges().size(); ++i) {
            const Edge& e = g.edges()[i];
            if (!e.directed() || e.visible) continue;
            if (!legal_reversal(g, e.tail_node(), e.head_node())) continue;
            MixedGraph next = with_reversed_edge(g, static_cast<int>(i));
            const std::string key = canonical_edge_list(next);
            if (visited.count(key)) continue;
            visited.emplace(key, next);
            queue.push_back(std::move(next));
        }
    }
    std::vector<MixedGraph> out;
    out.reserve(visited.size());
    for (auto& [key, g] : visited) out.push_back(std::move(g));
    return out;
}

std::vector<MixedGraph> enumerate_mbd(const MixedGraph& leg) {
    const MixedGraph mag = validated_mag(leg);
    const std::vector<std::uint64_t> target = separation_fingerprint(mag);
    MixedGraph start = mag;
    start.set_kind(GraphKind::CausalDiagram);
    annotate_visible_edges(start);

    std::map<std::string, MixedGraph> visited, maximal;
    std::deque<MixedGraph> queue;
    visited.emplace(canonical_edge_list(start), start);
    queue.push_back(start);
    while (!queue.empty()) {
        const MixedGraph g = std::move(queue.front());
        queue.pop_front();
        bool extendable = false;
        const size_t edge_count = g.edges().size();
        for (size_t i = 0; i < edge_count; ++i) {
            const Edge& e = g.edges()[i];
            if (!e.directed() || e.visible) continue;
            if (g.edges_between(e.a, e.b).size() > 1) continue;
            MixedGraph next = g;
            next.add_edge_ids(e.a, Mark::Arrow, Mark::Arrow, e.b);
            annotate_visible_edges(next);
            if (separation_fingerprint(next) != target) continue;
            extendable = true;
            const std::string key = canonical_edge_list(next);
            if (visited.count(key)) continue;
            visited.emplace(key, next);
            queue.push_back(std::move(next));
        }
        if (!extendable) maximal.emplace(canonical_edge_list(g), g);
    }
    std::vector<MixedGraph> out;
    out.reserve(maximal.size());
    for (auto& [key, g] : maximal) out.push_back(std::move(g));
    return out;
}

MixedGraph representative_mag(const MixedGraph& p) {
    try {
        validate_graph(p);
    } catch (const Error& e) {
        throw CompletionFailed(std::string("input graph rejected: ") + e.what());
    }
    MixedGraph out = p;
    for (Edge& e : out.edges()) {
        if (e.mark_a == Mark::Circle && e.mark_b == Mark::Arrow) e.mark_a = Mark::Tail;
        if (e.mark_b == Mark::Circle && e.mark_a == Mark::Arrow) e.mark_b = Mark::Tail;
    }
    // orient each circle component along a maximum cardinality search order;
    // earlier neighbors of every visited node must form a clique
    const int n = out.node_count();
    std::vector<NodeSet> circle_adj(static_cast<size_t>(n), 0);
    for (const Edge& e : out.edges()) {
        if (e.mark_a == Mark::Circle && e.mark_b == Mark::Circle) {
            circle_adj[static_cast<size_t>(e.a)] |= ns_bit(e.b);
            circle_adj[static_cast<size_t>(e.b)] |= ns_bit(e.a);
        }
    }
    std::vector<int> rank(static_cast<size_t>(n), -1);
    std::vector<int> weight(static_cast<size_t>(n), 0);
    NodeSet pending = 0;
    for (int v = 0; v < n; ++v)
        if (circle_adj[static_cast<size_t>(v)]) pending |= ns_bit(v);
    NodeSet done = 0;
    int next_rank = 0;
    while (pending) {
        int pick = -1;
        ns_for_each(pending, [&](int v) {
            if (pick < 0 || weight[static_cast<size_t>(v)] > weight[static_cast<size_t>(pick)])
                pick = v;
        });
        const NodeSet earlier = circle_adj[static_cast<size_t>(pick)] & done;
        ns_for_each(earlier, [&](int u) {
            if (!ns_subset(earlier & ~ns_bit(u), circle_adj[static_cast<size_t>(u)] | ns_bit(u)))
                throw CompletionFailed("circle component is not chordal at " + out.node_name(u));
        });
        rank[static_cast<size_t>(pick)] = next_rank++;
        done |= ns_bit(pick);
        pending &= ~ns_bit(pick);
        ns_for_each(circle_adj[static_cast<size_t>(pick)] & pending,
                    [&](int u) { ++weight[static_cast<size_t>(u)]; });
    }
    for (Edge& e : out.edges()) {
        if (e.mark_a != Mark::Circle || e.mark_b != Mark::Circle) continue;
        const bool a_first = rank[static_cast<size_t>(e.a)] < rank[static_cast<size_t>(e.b)];
        e.mark_a = a_first ? Mark::Tail : Mark::Arrow;
        e.mark_b = a_first ? Mark::Arrow : Mark::Tail;
    }
    out.set_kind(GraphKind::Mag);
    annotate_visible_edges(out);
    try {
        validate_graph(out);
    } catch (const Error& e) {
        throw CompletionFailed(std::string("completion produced an invalid graph: ") + e.what());
    }
    return out;
}

namespace {

struct Composition {
    int root = -1;
    NodeSet children = 0;
    int sink = -1;
};

Composition composition_shape(const MixedGraph& g) {
    Composition c;
    for (int v = 0; v < g.node_count(); ++v) {
        bool has_child = false, has_parent = false;
        for (const Edge& e : g.edges()) {
            if (!e.directed() || !e.touches(v)) continue;
            (e.tail_node() == v ? has_child : has_parent) = true;
        }
        if (has_child && !has_parent) {
            c.root = v;
            break;
        }
    }
    if (c.root < 0) throw DomainError("witness graphs need a root with directed children");
    for (const Edge& e : g.edges()) {
        if (e.directed() && e.tail_node() == c.root) c.children |= ns_bit(e.head_node());
    }
    NodeSet shared = g.all_nodes();
    ns_for_each(c.children, [&](int child) {
        NodeSet grand = 0;
        for (const Edge& e : g.edges()) {
            if (e.directed() && e.tail_node() == child) grand |= ns_bit(e.head_node());
        }
        shared &= grand;
    });
    if (shared) c.sink = ns_first(shared);
    return c;
}

bool confounded_with_root(const MixedGraph& g, int root, int child) {
    for (const Edge& e : g.edges()) {
        if (e.bidirected() && e.touches(root) && e.other(root) == child) return true;
    }
    return false;
}

// Natural-bound interval for the root's effect: each child factor is the
// plain conditional when the edge is unconfounded and the natural-bound
// interval when a bidirected companion is present; a shared sink composes
// the child factors by interval arithmetic.
Interval composed_interval(const MixedGraph& g, const DiscreteDistribution& d,
                           const Composition& shape) {
    const int nv = d.variable_count();
    auto joint = [&](std::vector<int> pinned) { return d.partial_sum(pinned); };
    std::vector<int> base(static_cast<size_t>(nv), -1);
    const int root_var = d.variable_index(g.node_name(shape.root));
    base[static_cast<size_t>(root_var)] = 1;
    const double p_root = joint(base);

    auto child_factor = [&](int child, int value) {
        std::vector<int> pinned = base;
        const int var = d.variable_index(g.node_name(child));
        pinned[static_cast<size_t>(var)] = value;
        const double p_joint = joint(pinned);
        if (confounded_with_root(g, shape.root, child))
            return Interval{p_joint, std::min(1.0, p_joint + 1.0 - p_root)};
        const double cond = p_root > 0.0 ? p_joint / p_root : 0.0;
        return Interval{cond, cond};
    };

    if (shape.sink < 0) return child_factor(ns_first(shape.children), 1);

    const int sink_var = d.variable_index(g.node_name(shape.sink));
    Interval total{0.0, 0.0};
    std::vector<int> child_ids;
    ns_for_each(shape.children, [&](int c) { child_ids.push_back(c); });
    std::vector<int> combo(child_ids.size(), 0);
    while (true) {
        Interval part{1.0, 1.0};
        std::vector<int> pinned = base;
        for (size_t i = 0; i < child_ids.size(); ++i) {
            part = interval_combine(IntervalOp::Product, part,
                                    child_factor(child_ids[i], combo[i]));
            pinned[static_cast<size_t>(d.variable_index(g.node_name(child_ids[i])))] = combo[i];
        }
        const double den = joint(pinned);
        pinned[static_cast<size_t>(sink_var)] = 1;
        const double scale = den > 0.0 ? joint(pinned) / den : 0.0;
        part = interval_combine(IntervalOp::Product, part, Interval{scale, scale});
        total = interval_combine(IntervalOp::Sum, total, part);
        size_t i = 0;
        for (; i < combo.size(); ++i) {
            if (++combo[i] < d.card(d.variable_index(g.node_name(child_ids[i])))) break;
            combo[i] = 0;
        }
        if (i == combo.size()) break;
    }
    return total;
}

}  // namespace

bool nonredundancy_witness(const MixedGraph& g1, const MixedGraph& g2, std::uint64_t seed) {
    if (canonical_edge_list(g1) == canonical_edge_list(g2)) return false;
    if (g1.node_count() != g2.node_count())
        throw NodeMismatch("witness diagrams disagree on the node set");
    const Composition shape = composition_shape(g1);
    std::vector<Variable> vars;
    for (int v = 0; v < g1.node_count(); ++v) vars.push_back({g1.node_name(v), 2});
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < kWitnessAttempts; ++attempt) {
        std::vector<double> table(std::size_t{1} << g1.node_count());
        for (double& cell : table) cell = rnd01(rng) + 1e-3;
        DiscreteDistribution d(vars, std::move(table));
        d.normalize();
        const Interval a = composed_interval(g1, d, shape);
        const Interval b = composed_interval(g2, d, shape);
        if (std::abs(a.lo - b.lo) > kWitnessGap || std::abs(a.hi - b.hi) > kWitnessGap)
            return true;
    }
    return false;
}

}  // namespace pagbound
