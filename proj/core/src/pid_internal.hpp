#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pagbound/identify.hpp"

namespace pagbound::detail {

enum class Dir { Exact, Lower, Upper };

struct PidHooks {
    // Resolves Q[c] inside the identified factor q over t when the structural
    // rules are exhausted.  Returns null to abort (identification mode).
    std::function<QExprPtr(NodeSet c, NodeSet t, const QFactor& q, Dir dir)> unresolved;
    std::vector<std::string>* trace = nullptr;
    int* calls = nullptr;
};

// Recursive computation of Q[c] from the identified factor q over t.
QExprPtr pid_run(const MixedGraph& p, NodeSet c, NodeSet t, const QFactor& q, Dir dir,
                 const PidHooks& hooks);

}  // namespace pagbound::detail
