#include "pagbound/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pagbound/enumerate.hpp"

namespace pagbound {

namespace {

constexpr double kProbSlack = 1e-9;

double rnd01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<int> sorted_parents(const MixedGraph& g, int v) {
    std::vector<int> out;
    for (const Edge& e : g.edges()) {
        if (e.touches(v) && e.directed_into(v)) out.push_back(e.tail_node());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// exogenous indices shared at v: n + position in the sorted pair list
std::vector<int> shared_at(const MixedGraph& g, int v) {
    const auto pairs = shared_exogenous_pairs(g);
    std::vector<int> out;
    for (size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].first == v || pairs[i].second == v)
            out.push_back(g.node_count() + static_cast<int>(i));
    }
    return out;
}

void validate_scm(const Scm& m) {
    validate_graph(m.diagram);
    if (m.diagram.kind() != GraphKind::CausalDiagram)
        throw DomainError("structural models require a causal diagram");
    const int n = m.diagram.node_count();
    const auto pairs = shared_exogenous_pairs(m.diagram);
    if (m.domains.size() != static_cast<size_t>(n))
        throw DomainError("one domain size per endogenous variable expected");
    for (int c : m.domains)
        if (c < 2) throw DomainError("endogenous domains need at least two values");
    if (m.exogenous.size() != static_cast<size_t>(n) + pairs.size())
        throw DomainError("expected one exogenous input per node plus one per bidirected edge");
    for (const ExogenousVariable& u : m.exogenous) {
        if (u.card < 1 || u.probs.size() != static_cast<size_t>(u.card))
            throw DomainError("exogenous probability vector does not match its domain");
        double total = 0.0;
        for (double p : u.probs) {
            if (p < 0.0) throw DomainError("negative exogenous probability");
            total += p;
        }
        if (std::abs(total - 1.0) > kProbSlack)
            throw DomainError("exogenous probabilities must sum to one");
    }
    if (m.functions.size() != static_cast<size_t>(n))
        throw DomainError("one function table per endogenous variable expected");
    for (int v = 0; v < n; ++v) {
        size_t size = static_cast<size_t>(m.exogenous[static_cast<size_t>(v)].card);
        for (int p : sorted_parents(m.diagram, v))
            size *= static_cast<size_t>(m.domains[static_cast<size_t>(p)]);
        for (int u : shared_at(m.diagram, v))
            size *= static_cast<size_t>(m.exogenous[static_cast<size_t>(u)].card);
        const auto& f = m.functions[static_cast<size_t>(v)];
        if (f.size() != size)
            throw DomainError("function table size mismatch at " + m.diagram.node_name(v));
        for (int val : f)
            if (val < 0 || val >= m.domains[static_cast<size_t>(v)])
                throw DomainError("function value outside the domain of " +
                                  m.diagram.node_name(v));
    }
}

// conditional tables with the private exogenous input summed out:
// cpt[v][(parent idx, shared idx, value)], last index fastest
std::vector<std::vector<double>> private_marginal_tables(const Scm& m) {
    const int n = m.diagram.node_count();
    std::vector<std::vector<double>> cpt(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) {
        const auto parents = sorted_parents(m.diagram, v);
        const auto shared = shared_at(m.diagram, v);
        const int card = m.domains[static_cast<size_t>(v)];
        const ExogenousVariable& priv = m.exogenous[static_cast<size_t>(v)];
        size_t outer = 1;
        for (int p : parents) outer *= static_cast<size_t>(m.domains[static_cast<size_t>(p)]);
        size_t inner = 1;
        for (int u : shared) inner *= static_cast<size_t>(m.exogenous[static_cast<size_t>(u)].card);
        std::vector<double> table(outer * inner * static_cast<size_t>(card), 0.0);
        const auto& f = m.functions[static_cast<size_t>(v)];
        for (size_t pa = 0; pa < outer; ++pa) {
            for (int u = 0; u < priv.card; ++u) {
                for (size_t sh = 0; sh < inner; ++sh) {
                    const size_t arg = (pa * static_cast<size_t>(priv.card) + static_cast<size_t>(u)) * inner + sh;
                    const size_t out = (pa * inner + sh) * static_cast<size_t>(card) +
                                       static_cast<size_t>(f[arg]);
                    table[out] += priv.probs[static_cast<size_t>(u)];
                }
            }
        }
        cpt[static_cast<size_t>(v)] = std::move(table);
    }
    return cpt;
}

DiscreteDistribution distribution_with_do(const Scm& m, NodeSet fixed,
                                          const std::vector<int>& fixed_values) {
    validate_scm(m);
    const int n = m.diagram.node_count();
    ns_for_each(fixed, [&](int v) {
        const int val = fixed_values[static_cast<size_t>(v)];
        if (val < 0 || val >= m.domains[static_cast<size_t>(v)])
            throw DomainError("intervention value outside the domain of " +
                              m.diagram.node_name(v));
    });
    const auto cpt = private_marginal_tables(m);
    const auto pairs = shared_exogenous_pairs(m.diagram);

    std::vector<Variable> out_vars;
    std::vector<int> out_nodes;
    for (int v = 0; v < n; ++v) {
        if (ns_has(fixed, v)) continue;
        out_vars.push_back({m.diagram.node_name(v), m.domains[static_cast<size_t>(v)]});
        out_nodes.push_back(v);
    }
    size_t out_size = 1;
    for (const Variable& v : out_vars) out_size *= static_cast<size_t>(v.card);
    std::vector<double> table(out_size, 0.0);

    std::vector<int> shared_vals(pairs.size(), 0);
    std::vector<int> assign(static_cast<size_t>(n), 0);
    ns_for_each(fixed, [&](int v) { assign[static_cast<size_t>(v)] = fixed_values[static_cast<size_t>(v)]; });
    while (true) {
        double weight = 1.0;
        for (size_t i = 0; i < pairs.size(); ++i)
            weight *= m.exogenous[static_cast<size_t>(n) + i].probs[static_cast<size_t>(shared_vals[i])];
        if (weight > 0.0) {
            size_t cell = 0;
            while (true) {
                double p = weight;
                for (int v = 0; v < n && p > 0.0; ++v) {
                    if (ns_has(fixed, v)) continue;
                    size_t idx = 0;
                    for (int pa : sorted_parents(m.diagram, v))
                        idx = idx * static_cast<size_t>(m.domains[static_cast<size_t>(pa)]) +
                              static_cast<size_t>(assign[static_cast<size_t>(pa)]);
                    for (int u : shared_at(m.diagram, v))
                        idx = idx * static_cast<size_t>(m.exogenous[static_cast<size_t>(u)].card) +
                              static_cast<size_t>(shared_vals[static_cast<size_t>(u - n)]);
                    idx = idx * static_cast<size_t>(m.domains[static_cast<size_t>(v)]) +
                          static_cast<size_t>(assign[static_cast<size_t>(v)]);
                    p *= cpt[static_cast<size_t>(v)][idx];
                }
                table[cell] += p;
                size_t k = out_nodes.size();
                while (k-- > 0) {
                    int& val = assign[static_cast<size_t>(out_nodes[k])];
                    if (++val < m.domains[static_cast<size_t>(out_nodes[k])]) break;
                    val = 0;
                }
                if (k == static_cast<size_t>(-1)) break;
                ++cell;
            }
        }
        size_t k = pairs.size();
        while (k-- > 0) {
            if (++shared_vals[k] < m.exogenous[static_cast<size_t>(n) + k].card) break;
            shared_vals[k] = 0;
        }
        if (k == static_cast<size_t>(-1)) break;
    }
    return DiscreteDistribution(std::move(out_vars), std::move(table));
}

NodeSet directed_ancestors(const MixedGraph& g, int v) {
    NodeSet anc = ns_bit(v);
    bool grew = true;
    while (grew) {
        grew = false;
        for (const Edge& e : g.edges()) {
            if (!e.directed()) continue;
            if (ns_has(anc, e.head_node()) && !ns_has(anc, e.tail_node())) {
                anc |= ns_bit(e.tail_node());
                grew = true;
            }
        }
    }
    return anc;
}

}  // namespace

std::vector<std::pair<int, int>> shared_exogenous_pairs(const MixedGraph& diagram) {
    std::vector<std::pair<int, int>> pairs;
    for (const Edge& e : diagram.edges()) {
        if (e.bidirected()) pairs.emplace_back(std::min(e.a, e.b), std::max(e.a, e.b));
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

Scm random_scm(const MixedGraph& diagram, const std::vector<int>& domains, int exo_card,
               std::uint64_t seed) {
    validate_graph(diagram);
    if (diagram.kind() != GraphKind::CausalDiagram)
        throw DomainError("structural models require a causal diagram");
    if (exo_card < 2) throw DomainError("exogenous domains need at least two values");
    const int n = diagram.node_count();
    if (domains.size() != static_cast<size_t>(n))
        throw DomainError("one domain size per endogenous variable expected");

    std::mt19937_64 rng(seed);
    Scm m;
    m.diagram = diagram;
    m.domains = domains;
    const auto pairs = shared_exogenous_pairs(diagram);
    for (size_t i = 0; i < static_cast<size_t>(n) + pairs.size(); ++i) {
        ExogenousVariable u;
        u.card = exo_card;
        double total = 0.0;
        for (int k = 0; k < exo_card; ++k) {
            u.probs.push_back(-std::log(1.0 - rnd01(rng)));
            total += u.probs.back();
        }
        for (double& p : u.probs) p /= total;
        m.exogenous.push_back(std::move(u));
    }
    for (int v = 0; v < n; ++v) {
        size_t size = static_cast<size_t>(exo_card);
        for (int p : sorted_parents(diagram, v))
            size *= static_cast<size_t>(domains[static_cast<size_t>(p)]);
        for (size_t i = 0; i < pairs.size(); ++i)
            if (pairs[i].first == v || pairs[i].second == v)
                size *= static_cast<size_t>(exo_card);
        std::vector<int> f(size);
        for (int& val : f)
            val = static_cast<int>(rng() % static_cast<std::uint64_t>(domains[static_cast<size_t>(v)]));
        m.functions.push_back(std::move(f));
    }
    validate_scm(m);
    return m;
}

DiscreteDistribution observational_distribution(const Scm& m) {
    std::vector<int> none(static_cast<size_t>(m.diagram.node_count()), -1);
    return distribution_with_do(m, 0, none);
}

DiscreteDistribution interventional_distribution(const Scm& m, const Assignment& x) {
    if (x.values.size() != static_cast<size_t>(m.diagram.node_count()))
        throw NodeMismatch("intervention assignment sized for a different graph");
    return distribution_with_do(m, x.vars, x.values);
}

bool compatible_with_pag(const MixedGraph& diagram, const MixedGraph& p) {
    if (diagram.node_count() != p.node_count())
        throw NodeMismatch("diagram and graph disagree on the node count");
    for (int v = 0; v < diagram.node_count(); ++v) {
        if (diagram.node_name(v) != p.node_name(v))
            throw NodeMismatch("diagram and graph disagree on node " + std::to_string(v));
    }
    validate_graph(diagram);
    const MixedGraph mag = representative_mag(p);
    if (separation_fingerprint(diagram) != separation_fingerprint(mag)) return false;
    for (const Edge& e : p.edges()) {
        for (const int v : {e.a, e.b}) {
            const int other = e.other(v);
            const bool ancestor = ns_has(directed_ancestors(diagram, other), v);
            if (e.mark_at(v) == Mark::Arrow && ancestor) return false;
            if (e.mark_at(v) == Mark::Tail && !ancestor) return false;
        }
    }
    return true;
}

double effect_by_conditioning(const MixedGraph& diagram, const DiscreteDistribution& d,
                              const Assignment& x, const Assignment& y) {
    ns_for_each(x.vars, [&](int v) {
        for (const Edge& e : diagram.edges()) {
            if (!e.touches(v)) continue;
            if (e.directed_into(v) || e.bidirected())
                throw ConditionFailed("intervention on " + diagram.node_name(v) +
                                      " does not reduce to conditioning");
        }
    });
    std::vector<int> den(static_cast<size_t>(d.variable_count()), -1);
    auto pin = [&](const Assignment& a, std::vector<int>& pinned) {
        ns_for_each(a.vars, [&](int v) {
            const int var = d.variable_index(diagram.node_name(v));
            if (var < 0)
                throw UnboundVariable("no table variable named " + diagram.node_name(v));
            pinned[static_cast<size_t>(var)] = a.values[static_cast<size_t>(v)];
        });
    };
    pin(x, den);
    std::vector<int> num = den;
    pin(y, num);
    const double base = d.partial_sum(den);
    if (base <= 0.0) throw DivideByZero("conditioning event has zero probability");
    return d.partial_sum(num) / base;
}

}  // namespace pagbound
