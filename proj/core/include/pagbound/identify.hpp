#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pagbound/graph.hpp"
#include "pagbound/qexpr.hpp"

namespace pagbound {

// An interventional factor Q[scope] = P_{V \ scope}(scope), carried with the
// expression that computes it from the observational joint when identified.
struct QFactor {
    NodeSet scope = 0;
    QExprPtr expr;
    bool identified = true;
};

// Q[w] = sum_{scope \ w} Q[scope], legal when w is closed under possible
// ancestors inside the induced graph over the scope.
QFactor ancestral_margin(const QFactor& q, NodeSet w, const MixedGraph& p);

// Removes one bucket b from q's scope.  Requires the pc-component of b inside
// the scope to meet no possible child of b outside b.  Uses a direct margin
// when the kept set is possible-ancestor closed, otherwise refactorizes the
// scope into ordered bucket chunks and sums b out of its chunk group.
QFactor reduce_bucket(const QFactor& q, NodeSet b, const MixedGraph& p);

// Scopes of the factorization Q[c] = Q[base] * Q[rest] / Q[overlap] induced
// by the region of bucket b inside c.
struct RegionDecomposition {
    QFactor base;
    QFactor rest;
    QFactor overlap;
};
RegionDecomposition region_decompose(const QFactor& q, NodeSet c, NodeSet b,
                                     const MixedGraph& p);

struct IdpResult {
    bool identified = false;
    QExprPtr expr;        // set when identified
    NodeSet blocking = 0; // smallest scope that resisted identification
};

// Identification of P_x(y) from a PAG.  `d` optionally overrides the default
// target set (the possible ancestors of y after removing inflow to V \ x).
IdpResult idp(const MixedGraph& p, NodeSet x, NodeSet y, NodeSet d = 0);

namespace detail {
// number of recursive identification calls spent on the query, for budget checks
int idp_call_count(const MixedGraph& p, NodeSet x, NodeSet y);
}  // namespace detail

}  // namespace pagbound
