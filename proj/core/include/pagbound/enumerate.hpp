#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pagbound/graph.hpp"

namespace pagbound {

// m-separation verdicts for every ordered triple (x, y, Z) with x < y and
// Z ranging over the subsets of the remaining nodes, packed into bits in a
// fixed order.  Intended for the small graphs of the equivalence-class
// machinery; the cost grows exponentially with the node count.
std::vector<std::uint64_t> separation_fingerprint(const MixedGraph& g);

// Sorted single-line edge listing, used for deduplication and CLI output.
// Isolated nodes are appended by name so the listing determines the graph.
std::string canonical_edge_list(const MixedGraph& g);

// True when reversing the directed edge x -> y keeps every m-separation
// verdict intact.  The edge must exist, be directed, and be invisible.
bool legal_reversal(const MixedGraph& g, int x, int y);

// All graphs reachable from the seed MAG by legal reversals, the seed
// included, ordered by canonical edge listing.
std::vector<MixedGraph> enumerate_legs(const MixedGraph& seed);

// All maximal causal diagrams obtained from the seed MAG by adding bidirected
// companions to invisible directed edges without changing any m-separation
// verdict.  Maximal means no further companion can be added.
std::vector<MixedGraph> enumerate_mbd(const MixedGraph& leg);

// A MAG in the equivalence class of the PAG: circles on partially directed
// edges become tails and each circle component is oriented along a maximum
// cardinality search order.
MixedGraph representative_mag(const MixedGraph& p);

// Searches random tables for one on which the two diagrams' composed
// natural-bound intervals for the effect of the shared root differ by more
// than one percent.  Returns false for structurally identical diagrams or
// when no witness table is found.
bool nonredundancy_witness(const MixedGraph& g1, const MixedGraph& g2, std::uint64_t seed);

}  // namespace pagbound
