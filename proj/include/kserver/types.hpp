#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

namespace kserver {

/// Tree node, 1-based. Node 1 is the root; 0 is reserved as "no node".
struct NodeId {
    std::int32_t value = 0;

    constexpr NodeId() = default;
    constexpr explicit NodeId(std::int32_t v) : value(v) {}

    constexpr bool valid() const { return value > 0; }
    friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

/// Server identity from the initial enumeration, 1-based. Never reassigned.
struct ServerId {
    std::int32_t value = 0;

    constexpr ServerId() = default;
    constexpr explicit ServerId(std::int32_t v) : value(v) {}

    friend constexpr auto operator<=>(ServerId, ServerId) = default;
};

inline std::ostream& operator<<(std::ostream& os, NodeId v) { return os << v.value; }
inline std::ostream& operator<<(std::ostream& os, ServerId s) { return os << 's' << s.value; }

/// Edge-count distances. Per-query distances fit in 32 bits, accumulated costs do not.
using Length = std::int64_t;

enum class ErrorCode {
    NodeOutOfRange,
    DepthOutOfRange,
    DisconnectedGraph,
    CycleDetected,
    CountMismatch,
    ParseError,
    BadParams,
    MoveTooFar,
    InternalInvariantViolation,
    NonTermination,
    InstanceTooLarge,
    SanityBoundViolated,
    MismatchFound,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace kserver
