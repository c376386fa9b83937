#include "pagbound/bound.hpp"

#include <algorithm>
#include <cctype>
#include <initializer_list>
#include <map>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "pid_internal.hpp"

namespace pagbound {

namespace {

std::string lower_name(const MixedGraph& g, int node) {
    std::string s = g.node_name(node);
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string assignment_text(const MixedGraph& g, const Assignment& a) {
    std::string out;
    ns_for_each(a.vars, [&](int v) {
        if (!out.empty()) out += ",";
        out += lower_name(g, v) + "=" + std::to_string(a.values[static_cast<size_t>(v)]);
    });
    return out;
}

std::vector<int> merge_values(const MixedGraph& g, std::initializer_list<const Assignment*> parts) {
    std::vector<int> values(static_cast<size_t>(g.node_count()), -1);
    for (const Assignment* a : parts) {
        ns_for_each(a->vars, [&](int v) {
            values[static_cast<size_t>(v)] = a->values[static_cast<size_t>(v)];
        });
    }
    return values;
}

void check_assignment(const MixedGraph& g, const Assignment& a, const char* what) {
    if (a.values.size() != static_cast<size_t>(g.node_count()))
        throw NodeMismatch(std::string(what) + " assignment sized for a different graph");
    ns_for_each(a.vars, [&](int v) {
        if (a.values[static_cast<size_t>(v)] < 0)
            throw DomainError(std::string(what) + " assignment leaves " + g.node_name(v) +
                              " without a value");
    });
}

}  // namespace

BoundingContext bounding_context(const MixedGraph& p, NodeSet s, NodeSet c) {
    if (!ns_subset(c, p.all_nodes())) throw NotSubset("scope escapes the node set");
    if (!s || !ns_subset(s, c) || s == c)
        throw NotStrictSubset("the target factor must sit strictly inside the scope");
    BoundingContext ctx;
    ctx.S = s;
    ctx.C = c;
    ctx.W = possible_relatives(p, RelativeKind::An, s, c);
    ctx.R = ctx.W & ~s;
    ctx.T = possible_relatives(p, RelativeKind::Sp, s, c) & ~s;
    ctx.B = possible_relatives(p, RelativeKind::De, ctx.T, c) & ctx.R;
    ctx.A = ctx.R & ~ctx.B;
    ctx.Z = possible_relatives(p, RelativeKind::Pa, ctx.W, p.all_nodes()) &
            ~possible_relatives(p, RelativeKind::Pa, s, p.all_nodes());
    ctx.Sk = bucket_topological_order(p, s).back();
    return ctx;
}

std::pair<QExprPtr, QExprPtr> natural_bounds(NodeSet x, NodeSet y) {
    const QExprPtr joint = q_term(x | y);
    const QExprPtr upper =
        simplify(q_add({joint, q_const(1.0), q_term(x)}, {+1, +1, -1}));
    return {joint, upper};
}

QExprPtr lower_bound_q(const BoundingContext& ctx, const QFactor& q_w) {
    const QExprPtr den = simplify(q_sum(ctx.S | ctx.B, q_w.expr));
    const QExprPtr core = simplify(q_quotient(q_w.expr, den));
    return simplify(ctx.Z ? q_max(ctx.Z, core) : core);
}

QExprPtr upper_bound_q(const BoundingContext& ctx, const QFactor& q_w,
                       const QExprPtr& remainder) {
    const QExprPtr den = simplify(q_sum(ctx.S | ctx.B, q_w.expr));
    const QExprPtr cut = simplify(q_sum(ctx.Sk, q_w.expr));
    const QExprPtr num = simplify(q_add({q_w.expr, cut}, {+1, -1}));
    const QExprPtr core = simplify(q_quotient(num, den));
    const QExprPtr wrapped = ctx.Z ? q_min(ctx.Z, core) : core;
    return simplify(q_add({wrapped, remainder}, {+1, +1}));
}

namespace {

// Upper bound on the normalized interventional factor over `scope`, built
// from observational margins alone.
QExprPtr remainder_upper(const MixedGraph& p, NodeSet scope) {
    const NodeSet closure = possible_relatives(p, RelativeKind::An, scope, p.all_nodes());
    if (closure == scope) return q_term(scope);
    const BoundingContext ctx = bounding_context(p, scope, closure);
    const QFactor q_w{closure, q_term(closure), true};
    const NodeSet tail = scope & ~ctx.Sk;
    const QExprPtr rem = tail ? remainder_upper(p, tail) : q_const(1.0);
    return upper_bound_q(ctx, q_w, rem);
}

}  // namespace

namespace detail {

SymbolicBounds symbolic_effect_bounds(const MixedGraph& p, NodeSet x, NodeSet y, NodeSet d) {
    const NodeSet all = p.all_nodes();
    if (!ns_subset(x | y | d, all)) throw NotSubset("query escapes the node set");
    if (!y) throw NotSubset("empty outcome set");
    if (x & y) throw NotSubset("treatment and outcome sets overlap");
    const NodeSet rest = all & ~x;
    const MixedGraph tilde = tilde_manipulation(p, rest);
    const NodeSet target = d ? d : possible_relatives(tilde, RelativeKind::An, y, rest);
    if (!ns_subset(y, target) || (target & x))
        throw NotSubset("target set must contain the outcome and avoid the treatment");

    SymbolicBounds out;
    bool unresolved_seen = false;
    int next_tag = 0;
    std::map<int, NodeSet> pending;

    auto run = [&](Dir dir, bool with_trace) {
        PidHooks hooks;
        hooks.calls = &out.calls;
        if (with_trace) hooks.trace = &out.trace;
        hooks.unresolved = [&](NodeSet c, NodeSet t, const QFactor& q, Dir leaf) -> QExprPtr {
            unresolved_seen = true;
            const BoundingContext ctx = bounding_context(p, c, t);
            const QFactor q_w = ancestral_margin(q, ctx.W, p);
            if (leaf == Dir::Lower) {
                out.trace.push_back("bounded factor over " + p.describe_set(c) +
                                    " from below inside " + p.describe_set(t));
                return lower_bound_q(ctx, q_w);
            }
            out.trace.push_back("bounded factor over " + p.describe_set(c) +
                                " from above inside " + p.describe_set(t));
            const NodeSet tail = c & ~ctx.Sk;
            QExprPtr rem = q_const(1.0);
            if (tail) {
                ++next_tag;
                pending[next_tag] = tail;
                rem = q_unknown(tail, next_tag);
            }
            return upper_bound_q(ctx, q_w, rem);
        };
        const QExprPtr body =
            pid_run(p, target, all, QFactor{all, q_term(all), true}, dir, hooks);
        QExprPtr assembled = simplify(q_sum(target & ~y, body));
        // a residual factor whose whole scope is summed away normalizes out;
        // anything left is replaced by its observational upper bound
        for (const QExprPtr& u : collect_unknowns(assembled)) {
            const auto it = pending.find(u->tag);
            if (it == pending.end()) continue;
            out.trace.push_back("replaced residual factor over " + p.describe_set(it->second) +
                                " by its observational upper bound");
            assembled = substitute_unknown(assembled, u->tag, remainder_upper(p, it->second));
        }
        return simplify(assembled);
    };

    out.calls = 0;
    out.lower = run(Dir::Lower, true);
    const int lower_calls = out.calls;
    out.calls = 0;
    out.upper = run(Dir::Upper, false);
    out.calls = std::max(out.calls, lower_calls);
    out.identified = !unresolved_seen;
    if (out.identified) out.upper = out.lower;
    return out;
}

}  // namespace detail

BoundReport partial_idp(const MixedGraph& p, const Assignment& x, const Assignment& y,
                        const DiscreteDistribution& d) {
    check_assignment(p, x, "treatment");
    check_assignment(p, y, "outcome");
    detail::SymbolicBounds sym = detail::symbolic_effect_bounds(p, x.vars, y.vars);

    BoundReport r;
    std::ostringstream q;
    q << "P";
    if (x.vars) q << "_{" << assignment_text(p, x) << "}";
    q << "(" << assignment_text(p, y) << ")";
    r.query = q.str();
    r.lower_expr = sym.lower;
    r.upper_expr = sym.upper;
    r.identified = sym.identified;
    r.trace = std::move(sym.trace);

    const auto nat = natural_bounds(x.vars, y.vars);
    r.natural_lower_expr = nat.first;
    r.natural_upper_expr = nat.second;

    const std::vector<int> values = merge_values(p, {&x, &y});
    r.interval = Interval{evaluate(r.lower_expr, d, p, values),
                          evaluate(r.upper_expr, d, p, values)};
    r.natural = Interval{evaluate(r.natural_lower_expr, d, p, values),
                         evaluate(r.natural_upper_expr, d, p, values)};
    return r;
}

BoundReport conditional_bounds(const MixedGraph& p, const Assignment& x, const Assignment& y,
                               const Assignment& z, const DiscreteDistribution& d) {
    if (!z.vars) return partial_idp(p, x, y, d);
    check_assignment(p, x, "treatment");
    check_assignment(p, y, "outcome");
    check_assignment(p, z, "conditioning");
    if ((x.vars & z.vars) || (y.vars & z.vars))
        throw NotSubset("conditioning set overlaps the query sets");

    const NodeSet all = p.all_nodes();
    const NodeSet yz = y.vars | z.vars;
    const NodeSet rest = all & ~x.vars;
    const MixedGraph tilde = tilde_manipulation(p, rest);
    const NodeSet target = possible_relatives(tilde, RelativeKind::An, yz, rest);
    detail::SymbolicBounds sym = detail::symbolic_effect_bounds(p, x.vars, yz, target);

    // coherent fraction of interval-valued joints: the numerator takes one
    // endpoint while the competing outcome values take the other
    auto fraction = [&](const QExprPtr& num, const QExprPtr& other) {
        const QExprPtr den = simplify(
            q_add({num, q_sum(y.vars, other), other}, {+1, +1, -1}));
        return simplify(q_quotient(num, den));
    };
    BoundReport r;
    r.lower_expr = fraction(sym.lower, sym.upper);
    r.upper_expr = fraction(sym.upper, sym.lower);
    r.identified = sym.identified;
    r.trace = std::move(sym.trace);

    std::ostringstream q;
    q << "P";
    if (x.vars) q << "_{" << assignment_text(p, x) << "}";
    q << "(" << assignment_text(p, y) << " | " << assignment_text(p, z) << ")";
    r.query = q.str();

    const auto nat = natural_bounds(x.vars, yz);
    r.natural_lower_expr = fraction(nat.first, nat.second);
    r.natural_upper_expr = fraction(nat.second, nat.first);

    const std::vector<int> values = merge_values(p, {&x, &y, &z});
    auto eval_or_vacuous = [&](const QExprPtr& e, double fallback, const char* side) {
        try {
            return evaluate(e, d, p, values);
        } catch (const DivideByZero&) {
            r.trace.push_back(std::string("conditional ") + side +
                              " denominator vanished; reporting the vacuous bound");
            return fallback;
        }
    };
    r.interval = Interval{eval_or_vacuous(r.lower_expr, 0.0, "lower"),
                          eval_or_vacuous(r.upper_expr, 1.0, "upper")};
    r.natural = Interval{eval_or_vacuous(r.natural_lower_expr, 0.0, "natural lower"),
                         eval_or_vacuous(r.natural_upper_expr, 1.0, "natural upper")};
    return r;
}

std::string report_to_json(const BoundReport& r, const MixedGraph& g) {
    nlohmann::json j;
    j["query"] = r.query;
    j["lower"] = r.interval.lo;
    j["upper"] = r.interval.hi;
    j["lower_expr"] = to_string(r.lower_expr, g);
    j["upper_expr"] = to_string(r.upper_expr, g);
    j["identified"] = r.identified;
    j["natural"] = {{"lower", r.natural.lo},
                    {"upper", r.natural.hi},
                    {"lower_expr", to_string(r.natural_lower_expr, g)},
                    {"upper_expr", to_string(r.natural_upper_expr, g)}};
    j["trace"] = r.trace;
    return j.dump(2);
}

}  // namespace pagbound
