#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pagbound/dist.hpp"
#include "pagbound/graph.hpp"
#include "pagbound/identify.hpp"
#include "pagbound/qexpr.hpp"

namespace pagbound {

// A query assignment: values[i] holds the value of node i when i is in vars.
struct Assignment {
    NodeSet vars = 0;
    std::vector<int> values;  // indexed by node id, -1 when unset

    static Assignment empty(const MixedGraph& g) {
        return Assignment{0, std::vector<int>(static_cast<size_t>(g.node_count()), -1)};
    }
    void set(int node, int value) {
        vars |= ns_bit(node);
        values[static_cast<size_t>(node)] = value;
    }
};

// Sets used by the two-sided bound on Q[S] inside the scope C.
struct BoundingContext {
    NodeSet S = 0;   // target factor scope
    NodeSet C = 0;   // enclosing identified scope
    NodeSet W = 0;   // possible ancestors of S inside C
    NodeSet R = 0;   // W \ S
    NodeSet T = 0;   // possible spouses of S inside C, minus S
    NodeSet B = 0;   // possible descendants of T inside C, intersected with R
    NodeSet A = 0;   // R \ B
    NodeSet Z = 0;   // possible parents of W minus possible parents of S, in the full graph
    NodeSet Sk = 0;  // order-maximal bucket of S
};

BoundingContext bounding_context(const MixedGraph& p, NodeSet s, NodeSet c);

struct BoundReport {
    std::string query;
    QExprPtr lower_expr;
    QExprPtr upper_expr;
    Interval interval;
    bool identified = false;
    QExprPtr natural_lower_expr;
    QExprPtr natural_upper_expr;
    Interval natural;
    std::vector<std::string> trace;
};

// [P(x,y), P(x,y) + 1 - P(x)]
std::pair<QExprPtr, QExprPtr> natural_bounds(NodeSet x, NodeSet y);

// max_Z Q[W] / sum_{S u B} Q[W]; the max is dropped when Z is empty and the
// denominator is dropped when it reduces to one.
QExprPtr lower_bound_q(const BoundingContext& ctx, const QFactor& q_w);

// min_Z { (Q[W] - sum_{Sk} Q[W]) / sum_{S u B} Q[W] } + remainder, where
// `remainder` bounds Q[S \ Sk] from above.
QExprPtr upper_bound_q(const BoundingContext& ctx, const QFactor& q_w,
                       const QExprPtr& remainder);

// Two-sided bounds on P_x(y), evaluated at the assignments in x and y.
BoundReport partial_idp(const MixedGraph& p, const Assignment& x, const Assignment& y,
                        const DiscreteDistribution& d);

// Bounds on the conditional effect P_x(y | z).
BoundReport conditional_bounds(const MixedGraph& p, const Assignment& x, const Assignment& y,
                               const Assignment& z, const DiscreteDistribution& d);

std::string report_to_json(const BoundReport& r, const MixedGraph& g);

namespace detail {
// symbolic halves of partial_idp, independent of any table
struct SymbolicBounds {
    QExprPtr lower;
    QExprPtr upper;
    bool identified = false;
    int calls = 0;
    std::vector<std::string> trace;
};
SymbolicBounds symbolic_effect_bounds(const MixedGraph& p, NodeSet x, NodeSet y,
                                      NodeSet d = 0);
}  // namespace detail

}  // namespace pagbound
