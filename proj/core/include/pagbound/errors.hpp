#pragma once

#include <stdexcept>
#include <string>

namespace pagbound {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// graph construction and validation
struct CycleError : Error { explicit CycleError(const std::string& m) : Error(m) {} };
struct MarkError : Error { explicit MarkError(const std::string& m) : Error(m) {} };
struct DuplicateEdgeError : Error { explicit DuplicateEdgeError(const std::string& m) : Error(m) {} };
struct UnknownNode : Error { explicit UnknownNode(const std::string& m) : Error(m) {} };
struct NotSubset : Error { explicit NotSubset(const std::string& m) : Error(m) {} };
struct OrderError : Error { explicit OrderError(const std::string& m) : Error(m) {} };

// distributions and expressions
struct DomainError : Error { explicit DomainError(const std::string& m) : Error(m) {} };
struct EmptyData : Error { explicit EmptyData(const std::string& m) : Error(m) {} };
struct UnboundVariable : Error { explicit UnboundVariable(const std::string& m) : Error(m) {} };
struct LeafUnresolved : Error { explicit LeafUnresolved(const std::string& m) : Error(m) {} };
struct DivideByZero : Error { explicit DivideByZero(const std::string& m) : Error(m) {} };

// identification
struct NotAncestral : Error { explicit NotAncestral(const std::string& m) : Error(m) {} };
struct ConditionFailed : Error { explicit ConditionFailed(const std::string& m) : Error(m) {} };
struct NoDecomposition : Error { explicit NoDecomposition(const std::string& m) : Error(m) {} };

// bounding
struct NotStrictSubset : Error { explicit NotStrictSubset(const std::string& m) : Error(m) {} };

// enumeration
struct EdgeNotFound : Error { explicit EdgeNotFound(const std::string& m) : Error(m) {} };
struct VisibleEdge : Error { explicit VisibleEdge(const std::string& m) : Error(m) {} };
struct CompletionFailed : Error { explicit CompletionFailed(const std::string& m) : Error(m) {} };

// oracle
struct NodeMismatch : Error { explicit NodeMismatch(const std::string& m) : Error(m) {} };

}  // namespace pagbound
