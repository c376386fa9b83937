#include "pagbound/identify.hpp"

#include <algorithm>

#include "pid_internal.hpp"

namespace pagbound {

namespace {

bool bucket_removal_allowed(const MixedGraph& p, NodeSet b, NodeSet t) {
    const NodeSet cb = pc_component(p, b, t);
    const NodeSet ch = possible_relatives(p, RelativeKind::Ch, b, t);
    return ns_subset(cb & ch, b);
}

}  // namespace

QFactor ancestral_margin(const QFactor& q, NodeSet w, const MixedGraph& p) {
    if (!ns_subset(w, q.scope)) throw NotSubset("margin target escapes the factor scope");
    if (possible_relatives(p, RelativeKind::An, w, q.scope) != w)
        throw NotAncestral("target set is not possible-ancestor closed in its scope");
    return QFactor{w, simplify(q_sum(q.scope & ~w, q.expr)), q.identified};
}

QFactor reduce_bucket(const QFactor& q, NodeSet b, const MixedGraph& p) {
    const NodeSet t = q.scope;
    if (!ns_subset(b, t)) throw NotSubset("bucket escapes the factor scope");
    {
        bool is_bucket = false;
        for (const NodeSet& cand : buckets(p, t)) is_bucket |= cand == b;
        if (!is_bucket) throw ConditionFailed("removal set is not a bucket of the scope");
    }
    if (!bucket_removal_allowed(p, b, t))
        throw ConditionFailed("bucket's pc-component meets a possible child outside it");
    const NodeSet kept = t & ~b;
    if (possible_relatives(p, RelativeKind::An, kept, t) == kept) {
        return QFactor{kept, simplify(q_sum(b, q.expr)), q.identified};
    }
    // refactorize the scope along its bucket order and sum b out of the
    // chunks tied to its pc-component
    const NodeSet cb = pc_component(p, b, t);
    std::vector<QExprPtr> outside, inside;
    NodeSet done = 0;
    for (const NodeSet& d_i : bucket_topological_order(p, t)) {
        const NodeSet t_i = done | d_i;
        const NodeSet c_i = pc_component(p, d_i, t_i);
        const NodeSet cond =
            done & (c_i | possible_relatives(p, RelativeKind::Pa, c_i, t_i));
        const QExprPtr num = simplify(q_sum(t & ~(d_i | cond), q.expr));
        const QExprPtr den = simplify(q_sum(t & ~cond, q.expr));
        const QExprPtr chunk = simplify(q_quotient(num, den));
        ((d_i & cb) ? inside : outside).push_back(chunk);
        done = t_i;
    }
    outside.push_back(simplify(q_sum(b, q_product(std::move(inside)))));
    return QFactor{kept, simplify(q_product(std::move(outside))), q.identified};
}

RegionDecomposition region_decompose(const QFactor& q, NodeSet c, NodeSet b,
                                     const MixedGraph& p) {
    if (!ns_subset(b, c) || !ns_subset(c, q.scope))
        throw NotSubset("decomposition sets must nest inside the factor scope");
    const NodeSet rb = region(p, b, c);
    if (rb == c) throw NoDecomposition("the bucket's region covers the whole scope");
    const NodeSet rest = region(p, c & ~rb, c);
    const NodeSet overlap = rb & rest;
    return RegionDecomposition{QFactor{rb, q_unknown(rb, 0), false},
                               QFactor{rest, q_unknown(rest, 1), false},
                               QFactor{overlap, q_unknown(overlap, 2), false}};
}

namespace detail {

QExprPtr pid_run(const MixedGraph& p, NodeSet c, NodeSet t, const QFactor& q, Dir dir,
                 const PidHooks& hooks) {
    if (hooks.calls) ++*hooks.calls;
    if (!ns_subset(c, t)) throw NotSubset("target escapes the factor scope");
    if (!c) return q_const(1.0);
    if (c == t) return q.expr;
    auto note = [&](const std::string& s) {
        if (hooks.trace) hooks.trace->push_back(s);
    };
    // sum out a removable bucket, scanning the bucket order back to front
    const std::vector<NodeSet> order = bucket_topological_order(p, t);
    for (size_t i = order.size(); i-- > 0;) {
        const NodeSet b = order[i];
        if (!ns_subset(b, t & ~c)) continue;
        if (!bucket_removal_allowed(p, b, t)) continue;
        QFactor next = reduce_bucket(q, b, p);
        note("summed bucket " + p.describe_set(b) + " out of scope " + p.describe_set(t));
        return pid_run(p, c, t & ~b, next, dir, hooks);
    }
    // split the target into disjoint regions when possible
    NodeSet best_rb = 0, best_rest = 0;
    for (const NodeSet& b : bucket_topological_order(p, c)) {
        const NodeSet rb = region(p, b, c);
        if (rb == c) continue;
        const NodeSet rest = region(p, c & ~rb, c);
        if (rb & rest) continue;
        if (!best_rb || ns_size(rb) < ns_size(best_rb)) {
            best_rb = rb;
            best_rest = rest;
        }
    }
    if (best_rb) {
        note("split target " + p.describe_set(c) + " into regions " + p.describe_set(best_rb) +
             " and " + p.describe_set(best_rest));
        const QExprPtr lhs = pid_run(p, best_rb, t, q, dir, hooks);
        if (!lhs) return nullptr;
        const QExprPtr rhs = pid_run(p, best_rest, t, q, dir, hooks);
        if (!rhs) return nullptr;
        return simplify(q_product({lhs, rhs}));
    }
    if (hooks.unresolved) return hooks.unresolved(c, t, q, dir);
    return nullptr;
}

int idp_call_count(const MixedGraph& p, NodeSet x, NodeSet y) {
    int calls = 0;
    PidHooks hooks;
    hooks.calls = &calls;
    hooks.unresolved = [](NodeSet, NodeSet, const QFactor&, Dir) -> QExprPtr {
        return q_const(1.0);  // count structure only
    };
    const NodeSet rest = p.all_nodes() & ~x;
    const MixedGraph tilde = tilde_manipulation(p, rest);
    const NodeSet d = possible_relatives(tilde, RelativeKind::An, y, rest);
    pid_run(p, d, p.all_nodes(), QFactor{p.all_nodes(), q_term(p.all_nodes())}, Dir::Exact,
            hooks);
    return calls;
}

}  // namespace detail

IdpResult idp(const MixedGraph& p, NodeSet x, NodeSet y, NodeSet d) {
    const NodeSet all = p.all_nodes();
    if (!ns_subset(x | y | d, all)) throw NotSubset("query escapes the node set");
    if (!y) throw NotSubset("empty outcome set");
    if (x & y) throw NotSubset("treatment and outcome sets overlap");
    const NodeSet rest = all & ~x;
    const MixedGraph tilde = tilde_manipulation(p, rest);
    NodeSet target = d ? d : possible_relatives(tilde, RelativeKind::An, y, rest);
    if (!ns_subset(y, target) || (target & x))
        throw NotSubset("target set must contain the outcome and avoid the treatment");
    IdpResult out;
    NodeSet blocking = 0;
    detail::PidHooks hooks;
    hooks.unresolved = [&](NodeSet c, NodeSet, const QFactor&, detail::Dir) -> QExprPtr {
        if (!blocking || ns_size(c) < ns_size(blocking)) blocking = c;
        return nullptr;
    };
    const QExprPtr body = detail::pid_run(p, target, all, QFactor{all, q_term(all)},
                                          detail::Dir::Exact, hooks);
    if (!body) {
        out.identified = false;
        out.blocking = blocking;
        return out;
    }
    out.identified = true;
    out.expr = simplify(q_sum(target & ~y, body));
    return out;
}

}  // namespace pagbound
