#pragma once

#include <optional>
#include <span>
#include <vector>

#include "kserver/engine.hpp"

namespace kserver {

struct PhaseRecord {
    std::vector<ServerId> active;  // each moved exactly one edge
};

struct PhaseTrace {
    std::vector<PhaseRecord> phases;
    Length total_cost = 0;
};

struct NaiveResult {
    QueryOutcome outcome;
    PhaseTrace trace;
};

/// Reference simulator: repeat phases in which every active server steps one
/// edge towards q, until some server stands on q.
///
/// A server is active when no server at a different node lies on its path to
/// q and no server with a smaller id shares its node. When several servers
/// arrive at q together, the smallest id serves.
NaiveResult naive_query(const PreprocessedTree& pt, ServerConfiguration& config, NodeId q);

struct OfflineSolution {
    Length opt_cost = 0;
    std::vector<ServerId> schedule;  // serving server per request
};

/// Offline optimum by layered search over configurations where each request
/// is served by moving exactly one server. Limited to k <= 4, at most 8
/// requests and n <= 64; throws InstanceTooLarge beyond that.
OfflineSolution offline_optimum(const PreprocessedTree& pt, std::span<const NodeId> initial,
                                std::span<const NodeId> requests);

/// Offline optimum allowing any set of servers to move on every request.
/// Enumerates all n^k configurations per layer, so only for tiny instances
/// (n^k <= 4096).
Length exhaustive_optimum(const PreprocessedTree& pt, std::span<const NodeId> initial,
                          std::span<const NodeId> requests);

struct CompetitiveRecord {
    Length alg_cost = 0;
    Length opt_cost = 0;
    std::int32_t k = 0;
    Length diameter = 0;
    std::optional<double> ratio;  // alg / opt, only when opt > 0
    Length bound = 0;             // k * opt + k^2 * diameter
};

/// Throws SanityBoundViolated when alg_cost exceeds k * opt + k^2 * diameter.
CompetitiveRecord competitive_report(Length alg_cost, Length opt_cost, std::int32_t k, Length diameter);

}  // namespace kserver
