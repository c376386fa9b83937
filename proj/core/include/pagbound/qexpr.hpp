#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pagbound/dist.hpp"
#include "pagbound/graph.hpp"
#include "pagbound/nodeset.hpp"

namespace pagbound {

struct QExpr;
using QExprPtr = std::shared_ptr<const QExpr>;

enum class QKind : std::uint8_t {
    Term,      // P(vars | given) under the base distribution
    Sum,       // sum over assignments of `vars`
    Product,   // product of children
    Quotient,  // kids[0] / kids[1]
    Max,       // max over assignments of `vars`
    Min,       // min over assignments of `vars`
    Add,       // signed sum of children
    Const,     // numeric constant
    Unknown,   // normalized but unidentified factor over `vars`
};

struct QExpr {
    QKind kind = QKind::Const;
    NodeSet vars = 0;   // Term subject; Sum/Max/Min bound variables; Unknown scope
    NodeSet given = 0;  // Term conditioning variables (do parameters included)
    double value = 1.0;
    int tag = 0;  // Unknown identity
    std::vector<QExprPtr> kids;
    std::vector<int> signs;  // Add: +1 or -1 per child
};

QExprPtr q_term(NodeSet vars, NodeSet given = 0);
QExprPtr q_const(double v);
QExprPtr q_sum(NodeSet vars, QExprPtr child);
QExprPtr q_product(std::vector<QExprPtr> kids);
QExprPtr q_quotient(QExprPtr num, QExprPtr den);
QExprPtr q_max(NodeSet vars, QExprPtr child);
QExprPtr q_min(NodeSet vars, QExprPtr child);
QExprPtr q_add(std::vector<QExprPtr> kids, std::vector<int> signs);
QExprPtr q_unknown(NodeSet scope, int tag);

// variables not bound by an enclosing Sum/Max/Min
NodeSet free_vars(const QExprPtr& e);
bool contains_unknown(const QExprPtr& e);
std::vector<QExprPtr> collect_unknowns(const QExprPtr& e);
QExprPtr substitute_unknown(const QExprPtr& e, int tag, const QExprPtr& replacement);

// Exact value-preserving rewrites: flattening, constant folding, summing
// subjects out of conditionals, pulling sum-independent factors out,
// cancelling shared quotient factors, collapsing a sum that covers the full
// scope of a normalized unknown factor.
QExprPtr simplify(const QExprPtr& e);

// simplify + deterministic child ordering, for structural comparison
QExprPtr canonicalize(const QExprPtr& e);
bool q_equal(const QExprPtr& a, const QExprPtr& b);

std::string to_string(const QExprPtr& e, const MixedGraph& g);
QExprPtr parse_qexpr(const std::string& text, const MixedGraph& g);

// Evaluates with node values from `values` (indexed by node id, -1 unset).
// Graph nodes bind to distribution variables by case-insensitive name.
double evaluate(const QExprPtr& e, const DiscreteDistribution& d, const MixedGraph& g,
                std::vector<int>& values);
double evaluate(const QExprPtr& e, const DiscreteDistribution& d, const MixedGraph& g,
                const std::vector<int>& values);

}  // namespace pagbound
