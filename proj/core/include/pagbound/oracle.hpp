#pragma once

#include <cstdint>
#include <vector>

#include "pagbound/bound.hpp"
#include "pagbound/dist.hpp"
#include "pagbound/graph.hpp"

namespace pagbound {

// One discrete exogenous input with an explicit probability vector.
struct ExogenousVariable {
    int card = 2;
    std::vector<double> probs;
};

// Structural model over a causal diagram.  Every endogenous variable owns one
// private exogenous input; every bidirected edge contributes one exogenous
// input shared by its endpoints.  Shared inputs are ordered by the sorted
// node-id pairs of their edges.  functions[v] is a row-major lookup table
// over (parents ascending by id, private input, shared inputs at v in pair
// order), last argument fastest, with values in [0, domains[v]).
struct Scm {
    MixedGraph diagram;
    std::vector<int> domains;
    std::vector<ExogenousVariable> exogenous;  // one per node, then one per bidirected edge
    std::vector<std::vector<int>> functions;
};

// Sorted endpoint pairs of the diagram's bidirected edges, defining the
// layout of shared exogenous inputs.
std::vector<std::pair<int, int>> shared_exogenous_pairs(const MixedGraph& diagram);

Scm random_scm(const MixedGraph& diagram, const std::vector<int>& domains, int exo_card,
               std::uint64_t seed);

DiscreteDistribution observational_distribution(const Scm& m);

// Exact distribution of the submodel with x held fixed, over the remaining
// variables.
DiscreteDistribution interventional_distribution(const Scm& m, const Assignment& x);

// True when the diagram's separation verdicts match the PAG class and every
// definite mark of the PAG is respected by the diagram's ancestry.
bool compatible_with_pag(const MixedGraph& diagram, const MixedGraph& p);

// P_x(y) read off the observational table when every intervened variable is
// parentless and unconfounded in the diagram, making the intervention
// equivalent to conditioning.
double effect_by_conditioning(const MixedGraph& diagram, const DiscreteDistribution& d,
                              const Assignment& x, const Assignment& y);

}  // namespace pagbound
