#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <pagbound/identify.hpp>
#include <pagbound/oracle.hpp>

#include "support/fixtures.hpp"

using namespace pagbound;
using namespace testsupport;

namespace {

NodeSet set_of(const MixedGraph& g, std::initializer_list<const char*> names) {
    NodeSet s = 0;
    for (const char* n : names) s |= ns_bit(g.node_id(n));
    return s;
}

QFactor whole(const MixedGraph& g) {
    return QFactor{g.all_nodes(), q_term(g.all_nodes()), true};
}

}  // namespace

TEST_CASE("ancestral margin keeps closed sets and prints a plain term") {
    MixedGraph p = hub5_pag();
    QFactor q = whole(p);

    QFactor m = ancestral_margin(q, set_of(p, {"A", "B", "X"}), p);
    CHECK(m.scope == set_of(p, {"A", "B", "X"}));
    CHECK(m.identified);
    CHECK(to_string(m.expr, p) == "P(a,b,x)");

    CHECK_THROWS_AS(ancestral_margin(q, set_of(p, {"X"}), p), NotAncestral);

    QFactor small{set_of(p, {"C", "D"}), q_term(set_of(p, {"C", "D"})), true};
    CHECK_THROWS_AS(ancestral_margin(small, set_of(p, {"A"}), p), NotSubset);
}

TEST_CASE("bucket reduction walks the chain from the sink back to the sources") {
    MixedGraph p = chain5_pag();
    QFactor q = whole(p);

    q = reduce_bucket(q, set_of(p, {"S"}), p);
    CHECK(q.scope == set_of(p, {"W", "Z", "X", "Y"}));
    CHECK(to_string(q.expr, p) == "P(w,z,x,y)");

    q = reduce_bucket(q, set_of(p, {"X"}), p);
    CHECK(q.scope == set_of(p, {"W", "Z", "Y"}));
    CHECK(to_string(q.expr, p) == "P(y|z,x)P(w)P(z)");

    q = reduce_bucket(q, set_of(p, {"W"}), p);
    CHECK(q.scope == set_of(p, {"Z", "Y"}));
    CHECK(q.identified);
    CHECK(to_string(q.expr, p) == "P(y|z,x)P(z)");

    SUBCASE("a bucket whose component reaches a child outside it cannot leave") {
        CHECK_THROWS_WITH_AS(reduce_bucket(q, set_of(p, {"Z"}), p),
                             "bucket's pc-component meets a possible child outside it",
                             ConditionFailed);
    }
    SUBCASE("nodes outside the scope are rejected up front") {
        CHECK_THROWS_AS(reduce_bucket(q, set_of(p, {"X"}), p), NotSubset);
    }
}

TEST_CASE("bucket reduction rejects sets that are not whole buckets") {
    MixedGraph p = hub5_pag();
    CHECK_THROWS_WITH_AS(reduce_bucket(whole(p), set_of(p, {"C"}), p),
                         "removal set is not a bucket of the scope", ConditionFailed);
}

TEST_CASE("region decomposition splits a scope around a bucket") {
    SUBCASE("disjoint regions come back as separate unknown factors") {
        MixedGraph g = parse_graph_text("node A\nnode K\nnode B\nA --> K\nK --> B\n");
        RegionDecomposition rd = region_decompose(whole(g), g.all_nodes(), set_of(g, {"A"}), g);
        CHECK(rd.base.scope == set_of(g, {"A", "K"}));
        CHECK(rd.rest.scope == set_of(g, {"B"}));
        CHECK(rd.overlap.scope == 0);
        CHECK_FALSE(rd.base.identified);
        CHECK_FALSE(rd.rest.identified);
        CHECK(to_string(rd.base.expr, g) == "Q[a,k]");
        CHECK(to_string(rd.rest.expr, g) == "Q[b]");
        CHECK(rd.base.expr->tag == 0);
        CHECK(rd.rest.expr->tag == 1);
    }
    SUBCASE("regions may share nodes and the overlap is reported") {
        MixedGraph g = parse_graph_text("node B\nnode K\nnode D\nB --> K\nK o-> D\n");
        RegionDecomposition rd = region_decompose(whole(g), g.all_nodes(), set_of(g, {"B"}), g);
        CHECK(rd.base.scope == set_of(g, {"B", "K"}));
        CHECK(rd.rest.scope == set_of(g, {"K", "D"}));
        CHECK(rd.overlap.scope == set_of(g, {"K"}));
        CHECK(rd.overlap.expr->tag == 2);
    }
    SUBCASE("a region covering the whole scope leaves nothing to split") {
        MixedGraph g = parse_graph_text("node A\nnode K\nnode B\nA o-> K\nB o-> K\n");
        CHECK_THROWS_WITH_AS(region_decompose(whole(g), g.all_nodes(), set_of(g, {"K"}), g),
                             "the bucket's region covers the whole scope", NoDecomposition);
    }
    SUBCASE("the bucket must lie inside the candidate scope") {
        MixedGraph g = parse_graph_text("node A\nnode K\nnode B\nA --> K\nK --> B\n");
        CHECK_THROWS_AS(region_decompose(whole(g), set_of(g, {"A", "K"}), set_of(g, {"B"}), g),
                        NotSubset);
    }
}

TEST_CASE("effects downstream of the visible hub are identified") {
    MixedGraph p = hub5_pag();
    NodeSet x = set_of(p, {"X"});

    IdpResult rd = idp(p, x, set_of(p, {"D"}));
    CHECK(rd.identified);
    CHECK(to_string(rd.expr, p) == "P(d|x)");

    IdpResult rcd = idp(p, x, set_of(p, {"C", "D"}));
    CHECK(rcd.identified);
    CHECK(to_string(rcd.expr, p) == "P(c,d|x)");
}

TEST_CASE("identified hub expressions match interventional truth on compatible models") {
    MixedGraph p = hub5_pag();
    MixedGraph d = hub5_diagram();
    NodeSet x = set_of(p, {"X"});
    IdpResult r = idp(p, x, set_of(p, {"C", "D"}));
    REQUIRE(r.identified);

    for (std::uint64_t seed = 11; seed <= 20; ++seed) {
        Scm m = random_scm(d, {2, 2, 2, 2, 2}, 3, seed);
        REQUIRE(compatible_with_pag(d, p));
        DiscreteDistribution obs = observational_distribution(m);
        DiscreteDistribution post = interventional_distribution(m, make_assignment(d, {{"X", 1}}));

        std::vector<int> pin(static_cast<size_t>(post.variable_count()), -1);
        pin[static_cast<size_t>(post.variable_index("C"))] = 1;
        pin[static_cast<size_t>(post.variable_index("D"))] = 0;
        double truth = post.partial_sum(pin);

        std::vector<int> vals(static_cast<size_t>(p.node_count()), -1);
        vals[static_cast<size_t>(p.node_id("X"))] = 1;
        vals[static_cast<size_t>(p.node_id("C"))] = 1;
        vals[static_cast<size_t>(p.node_id("D"))] = 0;
        CHECK(evaluate(r.expr, obs, p, vals) == doctest::Approx(truth).epsilon(1e-12));
    }
}

TEST_CASE("a single intervention on the chain identifies through the invisible parent") {
    MixedGraph p = chain5_pag();
    IdpResult r = idp(p, set_of(p, {"X"}), set_of(p, {"Y"}));
    CHECK(r.identified);
    CHECK(to_string(r.expr, p) == "sum_{z}(P(y|z,x)P(z))");
}

TEST_CASE("intervening on every parent of the chain blocks at the effect bucket") {
    MixedGraph p = chain5_pag();
    IdpResult r = idp(p, set_of(p, {"X", "W", "Z"}), set_of(p, {"Y"}));
    CHECK_FALSE(r.identified);
    CHECK(r.blocking == set_of(p, {"Y"}));
    CHECK(r.expr == nullptr);
}

TEST_CASE("the recursion stays within its quadratic call budget") {
    MixedGraph hub = hub5_pag();
    int hub_calls = detail::idp_call_count(hub, set_of(hub, {"X"}), set_of(hub, {"D"}));
    CHECK(hub_calls == 4);
    CHECK(hub_calls <= hub.node_count() * hub.node_count());

    MixedGraph chain = chain5_pag();
    int chain_calls =
        detail::idp_call_count(chain, set_of(chain, {"X"}), set_of(chain, {"Y"}));
    CHECK(chain_calls <= chain.node_count() * chain.node_count());

    MixedGraph sachs = sachs_pag();
    int sachs_calls =
        detail::idp_call_count(sachs, set_of(sachs, {"PKC"}), set_of(sachs, {"ERK"}));
    CHECK(sachs_calls <= sachs.node_count() * sachs.node_count());
}
