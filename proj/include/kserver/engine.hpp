#pragma once

#include <optional>
#include <span>
#include <vector>

#include "kserver/ancestry_index.hpp"
#include "kserver/virtual_tree.hpp"

namespace kserver {

/// Positions of k identified servers plus the inverse map node -> occupants.
///
/// Occupant lists are sorted by server id. Only occupied nodes own a list;
/// a per-node slot table points into a pool of at most k lists.
class ServerConfiguration {
public:
    ServerConfiguration(std::int32_t node_count, std::span<const NodeId> positions);

    std::int32_t server_count() const { return static_cast<std::int32_t>(position_.size()); }
    std::int32_t node_count() const { return static_cast<std::int32_t>(slot_of_node_.size()) - 1; }

    NodeId position(ServerId s) const { return position_[s.value - 1]; }
    std::span<const NodeId> positions() const { return position_; }

    std::span<const ServerId> occupants(NodeId v) const {
        const auto slot = slot_of_node_[v.value];
        if (slot < 0) return {};
        return slots_[slot];
    }
    std::optional<ServerId> min_occupant(NodeId v) const {
        const auto slot = slot_of_node_[v.value];
        if (slot < 0) return std::nullopt;
        return slots_[slot].front();
    }

    void relocate(ServerId s, NodeId to);

    /// Rebuilds the occupant index from positions and compares.
    bool occupancy_consistent() const;

private:
    void insert(ServerId s, NodeId v);
    void erase(ServerId s, NodeId v);

    std::vector<NodeId> position_;
    std::vector<std::int32_t> slot_of_node_;  // [n+1], -1 when unoccupied
    std::vector<std::vector<ServerId>> slots_;
    std::vector<std::int32_t> free_slots_;
};

struct ServerMove {
    ServerId server;
    NodeId from;
    NodeId to;
    Length distance = 0;

    friend bool operator==(const ServerMove&, const ServerMove&) = default;
};

struct QueryOutcome {
    ServerId serving_server;
    std::vector<ServerMove> moves;  // servers that moved, ascending id
    Length cost = 0;

    friend bool operator==(const QueryOutcome&, const QueryOutcome&) = default;
};

/// Closest(v) / DistToClosest(v) per virtual node (local index).
struct PhaseAnnotation {
    std::vector<ServerId> closest;
    std::vector<Length> dist_to_closest;
};

/// One visit of the second phase: the budget inherited from the parent and
/// the budget after folding in DistToClosest of the visited node.
struct BudgetStep {
    std::int32_t local = 0;
    Length inherited = 0;
    Length budget = 0;
};

struct EngineOptions {
    /// Deliberately wrong: keep the inherited budget instead of taking the
    /// minimum. Exists so the differential harness can be shown to catch it.
    bool skip_budget_update = false;
};

/// First phase: post-order over the virtual tree rooted at q. Smaller
/// distance wins; ties go to the smaller server id.
PhaseAnnotation closest_computing(const VirtualTree& vt, const ServerConfiguration& config);
void closest_computing(const VirtualTree& vt, const ServerConfiguration& config, PhaseAnnotation& out);

/// The node z steps from `from` along the path to q. Throws MoveTooFar.
NodeId step_toward(const AncestryIndex& index, NodeId from, NodeId q, Length z);

/// Moves server s by z steps towards q and updates the configuration.
NodeId move_server(const AncestryIndex& index, ServerConfiguration& config, ServerId s, NodeId q, Length z);

/// Second phase, starting at local node v with budget b. Appends one entry
/// per moved server to `moves`.
void update_positions(const VirtualTree& vt, const PhaseAnnotation& ann, ServerConfiguration& config,
                      std::int32_t v, Length b, const AncestryIndex& index, NodeId q,
                      std::vector<ServerMove>& moves, const EngineOptions& options = {},
                      std::vector<BudgetStep>* trace = nullptr);

/// Serves one request with freshly allocated per-query buffers.
QueryOutcome process_query(const PreprocessedTree& pt, ServerConfiguration& config, NodeId q);

/// Online query processor that owns the configuration and keeps its per-query
/// buffers between requests.
class Engine {
public:
    Engine(const PreprocessedTree& pt, ServerConfiguration config, EngineOptions options = {});

    QueryOutcome process(NodeId q);

    const ServerConfiguration& configuration() const { return config_; }
    /// State of the last processed query.
    const VirtualTree& last_virtual_tree() const { return tree_; }
    const PhaseAnnotation& last_annotation() const { return annotation_; }

private:
    const PreprocessedTree* pt_;
    ServerConfiguration config_;
    EngineOptions options_;

    VirtualNodeSet nodes_;
    VirtualTree tree_;
    PhaseAnnotation annotation_;
};

}  // namespace kserver
