#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <pagbound/enumerate.hpp>
#include <pagbound/oracle.hpp>

#include "support/corpus.hpp"

using namespace pagbound;
using namespace testsupport;

namespace {

MixedGraph mag_as_diagram(const MixedGraph& mag) {
    MixedGraph d = mag;
    d.set_kind(GraphKind::CausalDiagram);
    return d;
}

size_t bucket_index(const std::vector<NodeSet>& order, int v) {
    for (size_t i = 0; i < order.size(); ++i)
        if (order[i] & ns_bit(v)) return i;
    REQUIRE(false);
    return order.size();
}

}  // namespace

TEST_CASE("two nodes split into the adjacent and the separated class") {
    std::vector<MixedGraph> mags = all_mags(default_names(2));
    CHECK(mags.size() == 4);

    std::vector<EquivalenceClass> classes = equivalence_classes(default_names(2));
    REQUIRE(classes.size() == 2);
    std::vector<size_t> sizes{classes[0].mags.size(), classes[1].mags.size()};
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<size_t>{1, 3});
}

TEST_CASE("three nodes give fifty-six graphs in eleven classes") {
    std::vector<MixedGraph> mags = all_mags(default_names(3));
    CHECK(mags.size() == 56);

    std::vector<EquivalenceClass> classes = equivalence_classes(default_names(3));
    CHECK(classes.size() == 11);

    size_t total = 0;
    for (const EquivalenceClass& c : classes) total += c.mags.size();
    CHECK(total == mags.size());

    SUBCASE("members share their class fingerprint") {
        for (const EquivalenceClass& c : classes) {
            std::vector<std::uint64_t> fp = separation_fingerprint(c.mags.front());
            for (const MixedGraph& m : c.mags) CHECK(separation_fingerprint(m) == fp);
        }
    }
    SUBCASE("distinct classes have distinct fingerprints") {
        std::map<std::vector<std::uint64_t>, int> seen;
        for (const EquivalenceClass& c : classes)
            seen[separation_fingerprint(c.mags.front())] += 1;
        CHECK(seen.size() == classes.size());
    }
}

TEST_CASE("the summary PAG reproduces each class") {
    for (const EquivalenceClass& c : equivalence_classes(default_names(3))) {
        MixedGraph rep = representative_mag(c.pag);
        CHECK(separation_fingerprint(rep) == separation_fingerprint(c.mags.front()));

        std::vector<std::string> members;
        for (const MixedGraph& m : c.mags) members.push_back(canonical_edge_list(m));
        CHECK(std::find(members.begin(), members.end(), canonical_edge_list(rep)) !=
              members.end());
    }
}

TEST_CASE("bucket orders respect every one-sided arrowhead") {
    for (const EquivalenceClass& c : equivalence_classes(default_names(3))) {
        std::vector<NodeSet> order = bucket_topological_order(c.pag, c.pag.all_nodes());

        NodeSet covered = 0;
        for (NodeSet b : order) {
            CHECK(b != 0);
            CHECK((covered & b) == 0);
            covered |= b;
        }
        CHECK(covered == c.pag.all_nodes());

        for (const Edge& e : c.pag.edges()) {
            bool head_a = e.mark_a == Mark::Arrow;
            bool head_b = e.mark_b == Mark::Arrow;
            if (head_a == head_b) continue;
            int tail = head_b ? e.a : e.b;
            int head = head_b ? e.b : e.a;
            CHECK(bucket_index(order, tail) <= bucket_index(order, head));
        }
    }
}

TEST_CASE("separation verdicts imply exact independence on generated models") {
    std::uint64_t seed = 400;
    for (const EquivalenceClass& c : equivalence_classes(default_names(3))) {
        MixedGraph rep = representative_mag(c.pag);
        MixedGraph diagram = mag_as_diagram(rep);
        Scm m = random_scm(diagram, {2, 2, 2}, 3, seed++);
        DiscreteDistribution d = observational_distribution(m);

        for (int x = 0; x < 3; ++x)
            for (int y = x + 1; y < 3; ++y) {
                int z = 3 - x - y;
                for (NodeSet cond : {NodeSet{0}, ns_bit(z)}) {
                    if (!m_separated(rep, ns_bit(x), ns_bit(y), cond)) continue;
                    int zcard = (cond != 0) ? 2 : 1;
                    for (int zv = 0; zv < zcard; ++zv)
                        for (int xv = 0; xv < 2; ++xv)
                            for (int yv = 0; yv < 2; ++yv) {
                                std::vector<int> pxz(3, -1), pyz(3, -1), pxyz(3, -1), pz(3, -1);
                                if (cond != 0) {
                                    pxz[static_cast<size_t>(z)] = zv;
                                    pyz[static_cast<size_t>(z)] = zv;
                                    pxyz[static_cast<size_t>(z)] = zv;
                                    pz[static_cast<size_t>(z)] = zv;
                                }
                                pxz[static_cast<size_t>(x)] = xv;
                                pxyz[static_cast<size_t>(x)] = xv;
                                pyz[static_cast<size_t>(y)] = yv;
                                pxyz[static_cast<size_t>(y)] = yv;
                                double joint = d.partial_sum(pxyz) * d.partial_sum(pz);
                                double split = d.partial_sum(pxz) * d.partial_sum(pyz);
                                CHECK(joint == doctest::Approx(split).epsilon(1e-10));
                            }
                }
            }
    }
}
