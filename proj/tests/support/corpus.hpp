#pragma once

#include <string>
#include <vector>

#include <pagbound/graph.hpp>

namespace testsupport {

struct EquivalenceClass {
    pagbound::MixedGraph pag;                // markwise union of the members, annotated
    std::vector<pagbound::MixedGraph> mags;  // members ordered by canonical edge list
};

// Every maximal ancestral graph over the given nodes, built by exhausting the
// four states of each pair (absent, both directions, bidirected) and keeping
// the graphs that validate and separate every non-adjacent pair.
std::vector<pagbound::MixedGraph> all_mags(const std::vector<std::string>& names);

// all_mags grouped by separation fingerprint, each group summarized into a
// PAG, ordered by the PAG's canonical edge list.
std::vector<EquivalenceClass> equivalence_classes(const std::vector<std::string>& names);

// Convenience node names v0..v{n-1}.
std::vector<std::string> default_names(int n);

}  // namespace testsupport
