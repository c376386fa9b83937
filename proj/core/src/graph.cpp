#include "pagbound/graph.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>
#include <utility>

namespace pagbound {

namespace {

constexpr int kMaxNodes = 64;

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') return false;
    }
    return !std::isdigit(static_cast<unsigned char>(s[0]));
}

// Definite ancestors of z (inclusive) along definite directed edges.
NodeSet definite_ancestors(const MixedGraph& g, NodeSet z) {
    NodeSet anc = z;
    bool grew = true;
    while (grew) {
        grew = false;
        for (const Edge& e : g.edges()) {
            if (!e.directed()) continue;
            const int head = e.head_node();
            const int tail = e.tail_node();
            if (ns_has(anc, head) && !ns_has(anc, tail)) {
                anc |= ns_bit(tail);
                grew = true;
            }
        }
    }
    return anc;
}

void check_acyclic_definite(const MixedGraph& g) {
    const int n = g.node_count();
    std::vector<NodeSet> de(n, 0);
    for (int v = 0; v < n; ++v) de[v] = ns_bit(v);
    bool grew = true;
    while (grew) {
        grew = false;
        for (const Edge& e : g.edges()) {
            if (!e.directed()) continue;
            const NodeSet merged = de[e.tail_node()] | de[e.head_node()];
            if (merged != de[e.tail_node()]) {
                de[e.tail_node()] = merged;
                grew = true;
            }
        }
    }
    for (const Edge& e : g.edges()) {
        if (!e.directed()) continue;
        if (ns_has(de[e.head_node()], e.tail_node()))
            throw CycleError("directed cycle through " + g.node_name(e.tail_node()));
    }
    // confounding between a cause and its effect is fine in a causal diagram
    // but breaks the ancestral property of a MAG or PAG
    if (g.kind() == GraphKind::CausalDiagram) return;
    for (const Edge& e : g.edges()) {
        if (!e.bidirected()) continue;
        if (ns_has(de[e.a], e.b) || ns_has(de[e.b], e.a))
            throw CycleError("almost directed cycle through " + g.node_name(e.a) + " <-> " +
                             g.node_name(e.b));
    }
}

}  // namespace

int MixedGraph::add_node(const std::string& name) {
    if (!valid_name(name)) throw UnknownNode("invalid node name '" + name + "'");
    for (int i = 0; i < node_count(); ++i) {
        if (names_[i] == name) return i;
    }
    if (node_count() >= kMaxNodes) throw Error("graphs are limited to 64 nodes");
    names_.push_back(name);
    return node_count() - 1;
}

bool MixedGraph::has_node(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

int MixedGraph::node_id(const std::string& name) const {
    for (int i = 0; i < node_count(); ++i) {
        if (names_[i] == name) return i;
    }
    throw UnknownNode("unknown node '" + name + "'");
}

const std::string& MixedGraph::node_name(int id) const {
    if (id < 0 || id >= node_count()) throw UnknownNode("node id out of range");
    return names_[id];
}

int MixedGraph::add_edge(const std::string& a, Mark ma, Mark mb, const std::string& b,
                         bool visible) {
    return add_edge_ids(add_node(a), ma, mb, add_node(b), visible);
}

int MixedGraph::add_edge_ids(int a, Mark ma, Mark mb, int b, bool visible) {
    if (a < 0 || a >= node_count() || b < 0 || b >= node_count())
        throw UnknownNode("edge endpoint out of range");
    edges_.push_back(Edge{a, b, ma, mb, visible});
    return static_cast<int>(edges_.size()) - 1;
}

void MixedGraph::remove_edge(int index) {
    edges_.erase(edges_.begin() + index);
}

bool MixedGraph::adjacent(int a, int b) const {
    for (const Edge& e : edges_) {
        if (e.touches(a) && e.touches(b) && a != b) return true;
    }
    return false;
}

int MixedGraph::edge_between(int a, int b) const {
    int found = -1;
    for (int i = 0; i < static_cast<int>(edges_.size()); ++i) {
        if (edges_[i].touches(a) && edges_[i].touches(b)) {
            if (found >= 0)
                throw DuplicateEdgeError("parallel edges between " + node_name(a) + " and " +
                                         node_name(b));
            found = i;
        }
    }
    return found;
}

std::vector<int> MixedGraph::edges_between(int a, int b) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(edges_.size()); ++i) {
        if (edges_[i].touches(a) && edges_[i].touches(b)) out.push_back(i);
    }
    return out;
}

NodeSet MixedGraph::neighbors(int v, NodeSet within) const {
    NodeSet out = 0;
    for (const Edge& e : edges_) {
        if (!e.touches(v)) continue;
        const int u = e.other(v);
        if (u != v && ns_has(within, u)) out |= ns_bit(u);
    }
    return out;
}

std::string MixedGraph::describe_set(NodeSet s) const {
    std::string out = "{";
    bool first = true;
    ns_for_each(s, [&](int i) {
        if (!first) out += ",";
        out += node_name(i);
        first = false;
    });
    return out + "}";
}

void validate_graph(const MixedGraph& g) {
    for (const Edge& e : g.edges()) {
        if (e.a == e.b) throw MarkError("self loop at " + g.node_name(e.a));
        if (e.a < 0 || e.b < 0 || e.a >= g.node_count() || e.b >= g.node_count())
            throw UnknownNode("edge endpoint out of range");
    }
    const bool diagram = g.kind() == GraphKind::CausalDiagram;
    for (size_t i = 0; i < g.edges().size(); ++i) {
        for (size_t j = i + 1; j < g.edges().size(); ++j) {
            const Edge& e = g.edges()[i];
            const Edge& f = g.edges()[j];
            if (!(e.touches(f.a) && e.touches(f.b))) continue;
            if (!diagram)
                throw DuplicateEdgeError("parallel edges between " + g.node_name(e.a) + " and " +
                                         g.node_name(e.b));
            // a causal diagram may pair one directed edge with one bidirected edge
            if (e.bidirected() == f.bidirected())
                throw DuplicateEdgeError("parallel edges of the same type between " +
                                         g.node_name(e.a) + " and " + g.node_name(e.b));
        }
    }
    for (const Edge& e : g.edges()) {
        const bool circles = e.mark_a == Mark::Circle || e.mark_b == Mark::Circle;
        switch (g.kind()) {
            case GraphKind::CausalDiagram:
                if (!e.directed() && !e.bidirected())
                    throw MarkError("causal diagrams admit only directed and bidirected edges");
                break;
            case GraphKind::Mag:
                if (circles) throw MarkError("circle mark in a graph declared as a MAG");
                break;
            case GraphKind::Pag:
                break;
        }
        if (e.visible && !e.directed())
            throw MarkError("visibility flag on a non-directed edge");
    }
    check_acyclic_definite(g);
}

void annotate_visible_edges(MixedGraph& g) {
    const int n = g.node_count();
    for (Edge& e : g.edges()) e.visible = false;
    for (Edge& e : g.edges()) {
        if (!e.directed()) continue;
        const int a = e.tail_node();
        const int b = e.head_node();
        NodeSet adj_b = g.neighbors(b, ns_full(n)) | ns_bit(b);
        NodeSet parents_b = 0;
        for (const Edge& f : g.edges()) {
            if (f.directed_into(b)) parents_b |= ns_bit(f.tail_node());
        }
        bool vis = false;
        // direct witness: some C outside adj(B) with an arrowhead at A
        for (const Edge& f : g.edges()) {
            if (!f.touches(a) || f.other(a) == a) continue;
            if (f.mark_at(a) != Mark::Arrow) continue;
            if (!ns_has(adj_b, f.other(a))) {
                vis = true;
                break;
            }
        }
        // otherwise walk bidirected links through parents of B
        if (!vis) {
            NodeSet frontier = 0;
            for (const Edge& f : g.edges()) {
                if (!f.touches(a)) continue;
                const int u = f.other(a);
                if (u == a) continue;
                if (f.mark_at(a) == Mark::Arrow && f.mark_at(u) == Mark::Arrow &&
                    ns_has(parents_b, u))
                    frontier |= ns_bit(u);
            }
            NodeSet seen = frontier;
            while (frontier && !vis) {
                const int u = ns_first(frontier);
                frontier &= frontier - 1;
                for (const Edge& f : g.edges()) {
                    if (!f.touches(u)) continue;
                    const int c = f.other(u);
                    if (c == u || f.mark_at(u) != Mark::Arrow) continue;
                    if (!ns_has(adj_b, c)) {
                        vis = true;
                        break;
                    }
                    if (f.mark_at(c) == Mark::Arrow && ns_has(parents_b, c) && !ns_has(seen, c)) {
                        seen |= ns_bit(c);
                        frontier |= ns_bit(c);
                    }
                }
            }
        }
        e.visible = vis;
    }
}

std::vector<Edge> visible_edges(const MixedGraph& g) {
    std::vector<Edge> out;
    for (const Edge& e : g.edges()) {
        if (e.visible && e.directed()) out.push_back(e);
    }
    return out;
}

std::vector<NodeSet> buckets(const MixedGraph& p, NodeSet subset) {
    if (!ns_subset(subset, p.all_nodes())) throw NotSubset("bucket subset escapes the node set");
    std::vector<NodeSet> out;
    NodeSet left = subset;
    while (left) {
        const int start = ns_first(left);
        NodeSet comp = ns_bit(start);
        NodeSet frontier = comp;
        while (frontier) {
            const int v = ns_first(frontier);
            frontier &= frontier - 1;
            for (const Edge& e : p.edges()) {
                if (!e.touches(v)) continue;
                const int u = e.other(v);
                if (u == v || !ns_has(subset, u) || ns_has(comp, u)) continue;
                if (e.mark_a == Mark::Circle && e.mark_b == Mark::Circle) {
                    comp |= ns_bit(u);
                    frontier |= ns_bit(u);
                }
            }
        }
        out.push_back(comp);
        left &= ~comp;
    }
    std::sort(out.begin(), out.end(),
              [](NodeSet a, NodeSet b) { return ns_first(a) < ns_first(b); });
    return out;
}

NodeSet bucket_of(const MixedGraph& p, int v, NodeSet subset) {
    if (!ns_has(subset, v)) throw NotSubset("node outside the requested subset");
    for (const NodeSet& b : buckets(p, subset)) {
        if (ns_has(b, v)) return b;
    }
    return ns_bit(v);
}

NodeSet possible_relatives(const MixedGraph& p, RelativeKind kind, NodeSet seed,
                           NodeSet within) {
    if (!ns_subset(seed, p.all_nodes()) || !ns_subset(within, p.all_nodes()))
        throw NotSubset("relative query escapes the node set");
    const NodeSet base = seed & within;
    auto one_step = [&](NodeSet cur, bool toward_parents) {
        NodeSet out = cur;
        for (const Edge& e : p.edges()) {
            if (!e.inside(within)) continue;
            for (int side = 0; side < 2; ++side) {
                const int u = side == 0 ? e.a : e.b;
                const int v = e.other(u);
                // u is a possible parent of v when the edge can be oriented u -> v
                if (e.mark_at(u) != Mark::Arrow && e.mark_at(v) != Mark::Tail) {
                    if (toward_parents && ns_has(cur, v)) out |= ns_bit(u);
                    if (!toward_parents && ns_has(cur, u)) out |= ns_bit(v);
                }
            }
        }
        return out;
    };
    switch (kind) {
        case RelativeKind::Pa:
            return one_step(base, true);
        case RelativeKind::Ch:
            return one_step(base, false);
        case RelativeKind::An: {
            NodeSet cur = base;
            for (;;) {
                const NodeSet next = one_step(cur, true);
                if (next == cur) return cur;
                cur = next;
            }
        }
        case RelativeKind::De: {
            NodeSet cur = base;
            for (;;) {
                const NodeSet next = one_step(cur, false);
                if (next == cur) return cur;
                cur = next;
            }
        }
        case RelativeKind::Sp: {
            NodeSet out = base;
            for (const Edge& e : p.edges()) {
                if (!e.inside(within) || e.visible) continue;
                if (ns_has(base, e.a)) out |= ns_bit(e.b);
                if (ns_has(base, e.b)) out |= ns_bit(e.a);
            }
            return out;
        }
    }
    return base;
}

NodeSet pc_component(const MixedGraph& p, NodeSet seed, NodeSet within) {
    if (!ns_subset(seed | within, p.all_nodes()))
        throw NotSubset("pc query escapes the node set");
    const NodeSet base = seed & within;
    NodeSet comp = base;
    // state: node entered through an arrowhead -> may continue as a collider
    std::vector<std::pair<int, bool>> stack;
    std::vector<char> seen(static_cast<size_t>(p.node_count()) * 2, 0);
    auto push = [&](int v, bool arrow_in) {
        const size_t key = static_cast<size_t>(v) * 2 + (arrow_in ? 1 : 0);
        if (seen[key]) return;
        seen[key] = 1;
        comp |= ns_bit(v);
        stack.emplace_back(v, arrow_in);
    };
    ns_for_each(base, [&](int s) {
        for (const Edge& e : p.edges()) {
            if (!e.touches(s) || e.visible || !e.inside(within)) continue;
            const int u = e.other(s);
            if (u == s || !ns_has(within, u)) continue;
            push(u, e.mark_at(u) == Mark::Arrow);
        }
    });
    while (!stack.empty()) {
        const auto [v, arrow_in] = stack.back();
        stack.pop_back();
        if (!arrow_in) continue;
        for (const Edge& e : p.edges()) {
            if (!e.touches(v) || e.visible || !e.inside(within)) continue;
            const int u = e.other(v);
            if (u == v) continue;
            // v becomes an inner node of the path, so both marks at v must be arrows
            if (e.mark_at(v) != Mark::Arrow) continue;
            push(u, e.mark_at(u) == Mark::Arrow);
        }
    }
    return comp;
}

NodeSet region(const MixedGraph& p, NodeSet a, NodeSet c) {
    if (!ns_subset(a, c)) throw NotSubset("region seed escapes its scope");
    const NodeSet pc = pc_component(p, a, c);
    NodeSet out = 0;
    for (const NodeSet& b : buckets(p, c)) {
        if (b & pc) out |= b;
    }
    return out;
}

std::vector<NodeSet> bucket_topological_order(const MixedGraph& p, NodeSet within) {
    const std::vector<NodeSet> bs = buckets(p, within);
    const int m = static_cast<int>(bs.size());
    auto bucket_index = [&](int v) {
        for (int i = 0; i < m; ++i) {
            if (ns_has(bs[i], v)) return i;
        }
        return -1;
    };
    std::vector<NodeSet> preds(m, 0);
    for (const Edge& e : p.edges()) {
        if (!e.inside(within)) continue;
        const bool arrow_a = e.mark_a == Mark::Arrow;
        const bool arrow_b = e.mark_b == Mark::Arrow;
        if (arrow_a == arrow_b) continue;  // bidirected or arrow-free: no constraint
        const int head = arrow_a ? e.a : e.b;
        const int tail = e.other(head);
        const int hi = bucket_index(head);
        const int ti = bucket_index(tail);
        if (hi != ti) preds[hi] |= ns_bit(ti);
    }
    std::vector<NodeSet> order;
    NodeSet done = 0;
    for (int step = 0; step < m; ++step) {
        int pick = -1;
        for (int i = 0; i < m; ++i) {
            if (ns_has(done, i) || !ns_subset(preds[i], done)) continue;
            if (pick < 0 || ns_first(bs[i]) < ns_first(bs[pick])) pick = i;
        }
        if (pick < 0) throw OrderError("bucket constraints contain a cycle");
        order.push_back(bs[pick]);
        done |= ns_bit(pick);
    }
    return order;
}

bool m_separated(const MixedGraph& g, NodeSet x, NodeSet y, NodeSet z) {
    const NodeSet all = g.all_nodes();
    if (!ns_subset(x | y | z, all)) throw NotSubset("separation query escapes the node set");
    if ((x & y) || (x & z) || (y & z)) throw NotSubset("separation arguments must be disjoint");
    for (const Edge& e : g.edges()) {
        if (e.mark_a == Mark::Circle || e.mark_b == Mark::Circle)
            throw MarkError("m-separation requires a circle-free graph");
    }
    const NodeSet anc_z = definite_ancestors(g, z);
    // state: (node, entered through an arrowhead at the node)
    std::vector<char> seen(static_cast<size_t>(g.node_count()) * 2, 0);
    std::vector<std::pair<int, bool>> stack;
    auto push = [&](int v, bool arrow_in) {
        const size_t key = static_cast<size_t>(v) * 2 + (arrow_in ? 1 : 0);
        if (seen[key]) return;
        seen[key] = 1;
        stack.emplace_back(v, arrow_in);
    };
    ns_for_each(x, [&](int s) {
        for (const Edge& e : g.edges()) {
            if (!e.touches(s)) continue;
            const int u = e.other(s);
            if (u == s) continue;
            push(u, e.mark_at(u) == Mark::Arrow);
        }
    });
    while (!stack.empty()) {
        const auto [v, arrow_in] = stack.back();
        stack.pop_back();
        if (ns_has(y, v)) return false;
        for (const Edge& e : g.edges()) {
            if (!e.touches(v)) continue;
            const int u = e.other(v);
            if (u == v) continue;
            const bool arrow_out = e.mark_at(v) == Mark::Arrow;
            const bool collider = arrow_in && arrow_out;
            if (collider ? !ns_has(anc_z, v) : ns_has(z, v)) continue;
            push(u, e.mark_at(u) == Mark::Arrow);
        }
    }
    return true;
}

MixedGraph tilde_manipulation(const MixedGraph& p, NodeSet s) {
    if (!ns_subset(s, p.all_nodes())) throw NotSubset("manipulation set escapes the node set");
    MixedGraph out = p;
    auto& es = out.edges();
    for (size_t i = es.size(); i-- > 0;) {
        Edge& e = es[i];
        const bool into_removed_a = e.mark_a == Mark::Arrow && !ns_has(s, e.a);
        const bool into_removed_b = e.mark_b == Mark::Arrow && !ns_has(s, e.b);
        if (!into_removed_a && !into_removed_b) continue;
        if (e.visible && e.directed() && !ns_has(s, e.head_node())) {
            es.erase(es.begin() + static_cast<long>(i));
            continue;
        }
        e.mark_a = Mark::Arrow;
        e.mark_b = Mark::Arrow;
        e.visible = false;
    }
    return out;
}

namespace {

struct EdgeSpec {
    std::string op;
    Mark ma, mb;
};

const std::vector<EdgeSpec>& edge_specs() {
    static const std::vector<EdgeSpec> specs = {
        {"o->", Mark::Circle, Mark::Arrow},
        {"-->", Mark::Tail, Mark::Arrow},
        {"<->", Mark::Arrow, Mark::Arrow},
        {"o-o", Mark::Circle, Mark::Circle},
    };
    return specs;
}

}  // namespace

MixedGraph parse_graph_text(const std::string& text) {
    MixedGraph g(GraphKind::Pag);
    bool kind_set = false;
    bool any_visible_flag = false;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        const std::string where = " at line " + std::to_string(lineno);
        if (tok[0] == "kind") {
            if (tok.size() != 2) throw Error("malformed kind line" + where);
            if (tok[1] == "pag")
                g.set_kind(GraphKind::Pag);
            else if (tok[1] == "mag")
                g.set_kind(GraphKind::Mag);
            else if (tok[1] == "diagram")
                g.set_kind(GraphKind::CausalDiagram);
            else
                throw Error("unknown graph kind '" + tok[1] + "'" + where);
            kind_set = true;
            continue;
        }
        if (tok[0] == "node") {
            if (tok.size() != 2) throw Error("malformed node line" + where);
            g.add_node(tok[1]);
            continue;
        }
        if (tok.size() != 3 && tok.size() != 4) throw Error("malformed edge line" + where);
        bool vis = false;
        if (tok.size() == 4) {
            if (tok[3] != "v" || tok[1] != "-->")
                throw Error("only directed edges take a visibility flag" + where);
            vis = true;
            any_visible_flag = true;
        }
        bool matched = false;
        for (const EdgeSpec& spec : edge_specs()) {
            if (tok[1] == spec.op) {
                g.add_edge(tok[0], spec.ma, spec.mb, tok[2], vis);
                matched = true;
                break;
            }
        }
        if (!matched) throw Error("unknown edge operator '" + tok[1] + "'" + where);
    }
    if (!kind_set) {
        bool circles = false;
        for (const Edge& e : g.edges())
            circles |= e.mark_a == Mark::Circle || e.mark_b == Mark::Circle;
        g.set_kind(circles ? GraphKind::Pag : GraphKind::Mag);
    }
    validate_graph(g);
    if (!any_visible_flag && g.kind() != GraphKind::CausalDiagram) annotate_visible_edges(g);
    return g;
}

std::string graph_to_text(const MixedGraph& g) {
    std::ostringstream out;
    switch (g.kind()) {
        case GraphKind::Pag: out << "kind pag\n"; break;
        case GraphKind::Mag: out << "kind mag\n"; break;
        case GraphKind::CausalDiagram: out << "kind diagram\n"; break;
    }
    for (int i = 0; i < g.node_count(); ++i) out << "node " << g.node_name(i) << "\n";
    std::vector<std::string> lines;
    for (const Edge& e : g.edges()) {
        int u = e.a, v = e.b;
        if (e.directed()) {
            u = e.tail_node();
            v = e.head_node();
        } else if (e.mark_a == e.mark_b && u > v) {
            std::swap(u, v);
        } else if (e.mark_at(u) == Mark::Arrow && e.mark_at(v) == Mark::Circle) {
            std::swap(u, v);  // canonical circle end first
        }
        std::string op;
        if (e.directed())
            op = "-->";
        else if (e.bidirected())
            op = "<->";
        else if (e.mark_at(u) == Mark::Circle && e.mark_at(v) == Mark::Circle)
            op = "o-o";
        else
            op = "o->";
        std::string line = g.node_name(u) + " " + op + " " + g.node_name(v);
        if (e.visible) line += " v";
        lines.push_back(line);
    }
    std::sort(lines.begin(), lines.end());
    for (const std::string& l : lines) out << l << "\n";
    return out.str();
}

MixedGraph load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open graph file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_graph_text(buf.str());
}

}  // namespace pagbound
