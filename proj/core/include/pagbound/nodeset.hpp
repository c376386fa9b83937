#pragma once

#include <bit>
#include <cstdint>

namespace pagbound {

// A set of graph node ids, one bit per id.  Graphs are capped at 64 nodes.
using NodeSet = std::uint64_t;

inline constexpr NodeSet kEmptySet = 0;

inline constexpr NodeSet ns_bit(int i) { return NodeSet{1} << i; }

inline constexpr bool ns_has(NodeSet s, int i) { return (s >> i) & NodeSet{1}; }

inline constexpr bool ns_subset(NodeSet a, NodeSet b) { return (a & ~b) == 0; }

inline constexpr bool ns_disjoint(NodeSet a, NodeSet b) { return (a & b) == 0; }

inline constexpr int ns_size(NodeSet s) { return std::popcount(s); }

inline constexpr NodeSet ns_full(int n) {
    return n >= 64 ? ~NodeSet{0} : (NodeSet{1} << n) - 1;
}

inline constexpr int ns_first(NodeSet s) { return std::countr_zero(s); }

inline constexpr int ns_last(NodeSet s) { return 63 - std::countl_zero(s); }

template <typename Fn>
void ns_for_each(NodeSet s, Fn&& fn) {
    while (s) {
        const int i = std::countr_zero(s);
        s &= s - 1;
        fn(i);
    }
}

}  // namespace pagbound
