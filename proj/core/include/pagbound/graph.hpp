#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pagbound/errors.hpp"
#include "pagbound/nodeset.hpp"

namespace pagbound {

enum class Mark : std::uint8_t { Tail, Arrow, Circle };

enum class GraphKind : std::uint8_t { CausalDiagram, Mag, Pag };

enum class RelativeKind : std::uint8_t { An, De, Pa, Ch, Sp };

struct Edge {
    int a = -1;
    int b = -1;
    Mark mark_a = Mark::Circle;  // mark at endpoint a
    Mark mark_b = Mark::Circle;  // mark at endpoint b
    bool visible = false;

    int other(int v) const { return v == a ? b : a; }
    Mark mark_at(int v) const { return v == a ? mark_a : mark_b; }
    void set_mark_at(int v, Mark m) { (v == a ? mark_a : mark_b) = m; }
    bool bidirected() const { return mark_a == Mark::Arrow && mark_b == Mark::Arrow; }
    bool directed() const {
        return (mark_a == Mark::Tail && mark_b == Mark::Arrow) ||
               (mark_a == Mark::Arrow && mark_b == Mark::Tail);
    }
    // definite directed edge pointing into v
    bool directed_into(int v) const { return directed() && mark_at(v) == Mark::Arrow; }
    int tail_node() const { return mark_a == Mark::Tail ? a : b; }
    int head_node() const { return mark_a == Mark::Arrow ? a : b; }
    bool touches(int v) const { return a == v || b == v; }
    bool inside(NodeSet s) const { return ns_has(s, a) && ns_has(s, b); }
};

class MixedGraph {
  public:
    explicit MixedGraph(GraphKind kind = GraphKind::Pag) : kind_(kind) {}

    GraphKind kind() const { return kind_; }
    void set_kind(GraphKind k) { kind_ = k; }

    int add_node(const std::string& name);
    bool has_node(const std::string& name) const;
    int node_id(const std::string& name) const;  // throws UnknownNode
    const std::string& node_name(int id) const;
    int node_count() const { return static_cast<int>(names_.size()); }
    NodeSet all_nodes() const { return ns_full(node_count()); }

    // adds nodes on demand; returns the edge index
    int add_edge(const std::string& a, Mark ma, Mark mb, const std::string& b,
                 bool visible = false);
    int add_edge_ids(int a, Mark ma, Mark mb, int b, bool visible = false);
    void remove_edge(int index);

    const std::vector<Edge>& edges() const { return edges_; }
    std::vector<Edge>& edges() { return edges_; }
    bool adjacent(int a, int b) const;
    // index of the unique edge between a and b, or -1; throws DuplicateEdgeError
    // if the pair carries parallel edges (possible in causal diagrams)
    int edge_between(int a, int b) const;
    std::vector<int> edges_between(int a, int b) const;
    NodeSet neighbors(int v, NodeSet within) const;

    std::string describe_set(NodeSet s) const;  // "{A,B}" with names sorted by id

  private:
    GraphKind kind_;
    std::vector<std::string> names_;
    std::vector<Edge> edges_;
};

// Checks structural well-formedness for the graph's kind: mark vocabulary,
// duplicate edges, self loops, directed and almost-directed cycles.
void validate_graph(const MixedGraph& g);

// Recomputes Edge::visible on every definite directed edge: A -> B is visible
// when some node C outside adj(B) points an arrowhead at A directly, or
// reaches A through a bidirected path whose inner nodes are all parents of B.
void annotate_visible_edges(MixedGraph& g);

// Definite directed edges currently flagged visible.
std::vector<Edge> visible_edges(const MixedGraph& g);

// Connected components of the circle-circle subgraph inside `subset`,
// ordered by smallest member id.
std::vector<NodeSet> buckets(const MixedGraph& p, NodeSet subset);

// Bucket of `subset` containing node v.
NodeSet bucket_of(const MixedGraph& p, int v, NodeSet subset);

// Possible relatives of `seed` inside `within`.  An/De are reflexive and
// transitive over potentially directed paths; Pa/Ch are one-step and include
// the seed; Sp collects nodes joined to the seed by a non-visible edge and
// includes the seed.
NodeSet possible_relatives(const MixedGraph& p, RelativeKind kind, NodeSet seed,
                           NodeSet within);

// Nodes reachable from `seed` inside `within` along paths with no visible
// edge whose non-endpoint nodes are all colliders.  Includes the seed.
NodeSet pc_component(const MixedGraph& p, NodeSet seed, NodeSet within);

// Union of the buckets of `c` that intersect pc_component(a, c).
NodeSet region(const MixedGraph& p, NodeSet a, NodeSet c);

// Buckets of `within` in a topological order of the arrow constraints:
// an edge with an arrowhead at exactly one endpoint orders the tail-side
// bucket before the head-side bucket.  Ties pick the smallest node id.
std::vector<NodeSet> bucket_topological_order(const MixedGraph& p, NodeSet within);

// m-separation of x and y given z.  Requires a circle-free graph.
bool m_separated(const MixedGraph& g, NodeSet x, NodeSet y, NodeSet z);

// Removes causal inflow into V \ s: every visible directed edge into a node
// outside s is deleted and every other edge with an arrowhead at a node
// outside s becomes bidirected.  The node set is unchanged.
MixedGraph tilde_manipulation(const MixedGraph& p, NodeSet s);

// Text format, one edge per line: "A o-> B", "A --> B", "A --> B v",
// "A <-> B", "A o-o B", plus optional "node X" and "kind pag|mag|diagram"
// lines and '#' comments.  Visibility flags are recomputed unless the file
// carries at least one "v" annotation.
MixedGraph parse_graph_text(const std::string& text);
std::string graph_to_text(const MixedGraph& g);
MixedGraph load_graph_file(const std::string& path);

}  // namespace pagbound
