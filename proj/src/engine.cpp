#include "kserver/engine.hpp"

#include <algorithm>
#include <string>

namespace kserver {

ServerConfiguration::ServerConfiguration(std::int32_t node_count, std::span<const NodeId> positions)
    : position_(positions.begin(), positions.end()), slot_of_node_(node_count + 1, -1) {
    if (positions.empty()) throw Error(ErrorCode::BadParams, "at least one server is required");
    slots_.reserve(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const NodeId v = positions[i];
        if (v.value < 1 || v.value > node_count) {
            throw Error(ErrorCode::NodeOutOfRange, "server " + std::to_string(i + 1) + " placed at node " +
                                                       std::to_string(v.value));
        }
        insert(ServerId{static_cast<std::int32_t>(i + 1)}, v);
    }
}

void ServerConfiguration::insert(ServerId s, NodeId v) {
    auto& slot = slot_of_node_[v.value];
    if (slot < 0) {
        if (free_slots_.empty()) {
            slot = static_cast<std::int32_t>(slots_.size());
            slots_.emplace_back();
        } else {
            slot = free_slots_.back();
            free_slots_.pop_back();
        }
    }
    auto& list = slots_[slot];
    list.insert(std::lower_bound(list.begin(), list.end(), s), s);
}

void ServerConfiguration::erase(ServerId s, NodeId v) {
    auto& slot = slot_of_node_[v.value];
    auto& list = slots_[slot];
    list.erase(std::lower_bound(list.begin(), list.end(), s));
    if (list.empty()) {
        free_slots_.push_back(slot);
        slot = -1;
    }
}

void ServerConfiguration::relocate(ServerId s, NodeId to) {
    if (s.value < 1 || s.value > server_count()) {
        throw Error(ErrorCode::BadParams, "no server with id " + std::to_string(s.value));
    }
    if (to.value < 1 || to.value > node_count()) {
        throw Error(ErrorCode::NodeOutOfRange, "node " + std::to_string(to.value));
    }
    auto& pos = position_[s.value - 1];
    if (pos == to) return;
    erase(s, pos);
    insert(s, to);
    pos = to;
}

bool ServerConfiguration::occupancy_consistent() const {
    ServerConfiguration fresh(node_count(), position_);
    std::int32_t total = 0;
    for (std::int32_t v = 1; v <= node_count(); ++v) {
        const auto mine = occupants(NodeId{v});
        const auto theirs = fresh.occupants(NodeId{v});
        if (!std::equal(mine.begin(), mine.end(), theirs.begin(), theirs.end())) return false;
        total += static_cast<std::int32_t>(mine.size());
    }
    return total == server_count();
}

void closest_computing(const VirtualTree& vt, const ServerConfiguration& config, PhaseAnnotation& out) {
    const auto size = vt.size();
    out.closest.assign(size, ServerId{});
    out.dist_to_closest.assign(size, 0);

    for (auto it = vt.preorder.rbegin(); it != vt.preorder.rend(); ++it) {
        const auto v = *it;
        if (const auto here = config.min_occupant(vt.nodes[v])) {
            out.closest[v] = *here;
            out.dist_to_closest[v] = 0;
            continue;
        }
        const auto kids = vt.children(v);
        if (kids.empty()) {
            throw Error(ErrorCode::InternalInvariantViolation,
                        "virtual leaf " + std::to_string(vt.nodes[v].value) + " hosts no server");
        }
        ServerId best_server;
        Length best = -1;
        for (const auto u : kids) {
            const Length d = out.dist_to_closest[u] + vt.parent_weight[u];
            if (best < 0 || d < best || (d == best && out.closest[u] < best_server)) {
                best = d;
                best_server = out.closest[u];
            }
        }
        out.closest[v] = best_server;
        out.dist_to_closest[v] = best;
    }
}

PhaseAnnotation closest_computing(const VirtualTree& vt, const ServerConfiguration& config) {
    PhaseAnnotation out;
    closest_computing(vt, config, out);
    return out;
}

NodeId step_toward(const AncestryIndex& index, NodeId from, NodeId q, Length z) {
    index.check(from);
    index.check(q);
    const NodeId l = index.lca_unchecked(from, q);
    const Length up = index.depth(from) - index.depth(l);
    const Length down = index.depth(q) - index.depth(l);
    if (z < 0 || z > up + down) {
        throw Error(ErrorCode::MoveTooFar, "cannot move " + std::to_string(z) + " steps from node " +
                                               std::to_string(from.value) + " towards node " +
                                               std::to_string(q.value) + " at distance " +
                                               std::to_string(up + down));
    }
    if (z <= up) return index.la_unchecked(from, static_cast<std::int32_t>(index.depth(from) - z));
    return index.la_unchecked(q, static_cast<std::int32_t>(index.depth(l) + z - up));
}

NodeId move_server(const AncestryIndex& index, ServerConfiguration& config, ServerId s, NodeId q, Length z) {
    const NodeId target = step_toward(index, config.position(s), q, z);
    config.relocate(s, target);
    return target;
}

void update_positions(const VirtualTree& vt, const PhaseAnnotation& ann, ServerConfiguration& config,
                      std::int32_t v, Length b, const AncestryIndex& index, NodeId q,
                      std::vector<ServerMove>& moves, const EngineOptions& options,
                      std::vector<BudgetStep>* trace) {
    struct Frame {
        std::int32_t node;
        Length budget;
    };
    std::vector<Frame> stack{{v, b}};
    while (!stack.empty()) {
        const auto [node, inherited] = stack.back();
        stack.pop_back();
        const Length budget =
            options.skip_budget_update ? inherited : std::min(inherited, ann.dist_to_closest[node]);
        if (trace != nullptr) trace->push_back({node, inherited, budget});

        const auto kids = vt.children(node);
        for (const auto u : kids) {
            if (ann.closest[u] == ann.closest[node]) continue;
            const ServerId s = ann.closest[u];
            const NodeId from = config.position(s);
            try {
                const NodeId to = move_server(index, config, s, q, budget);
                if (budget > 0) moves.push_back({s, from, to, budget});
            } catch (const Error& e) {
                if (e.code() != ErrorCode::MoveTooFar) throw;
                throw Error(ErrorCode::InternalInvariantViolation, e.what());
            }
        }
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back({*it, budget});
    }
}

namespace {

QueryOutcome serve(const PreprocessedTree& pt, ServerConfiguration& config, NodeId q, const EngineOptions& options,
                   VirtualNodeSet& nodes, VirtualTree& tree, PhaseAnnotation& ann) {
    pt.ancestry.check(q);
    collect_virtual_nodes(pt.ancestry, pt.traversal, config.positions(), q, nodes);
    build_virtual_tree(nodes, pt.traversal, pt.ancestry, q, tree);
    closest_computing(tree, config, ann);

    QueryOutcome outcome;
    const auto root = tree.root;
    const ServerId serving = ann.closest[root];
    const Length reach = ann.dist_to_closest[root];
    outcome.serving_server = serving;

    const NodeId from = config.position(serving);
    if (move_server(pt.ancestry, config, serving, q, reach) != q) {
        throw Error(ErrorCode::InternalInvariantViolation, "serving server did not reach the query node");
    }
    if (reach > 0) outcome.moves.push_back({serving, from, q, reach});

    update_positions(tree, ann, config, root, reach, pt.ancestry, q, outcome.moves, options);

    std::sort(outcome.moves.begin(), outcome.moves.end(),
              [](const ServerMove& a, const ServerMove& b) { return a.server < b.server; });
    for (const auto& m : outcome.moves) outcome.cost += m.distance;
    return outcome;
}

}  // namespace

QueryOutcome process_query(const PreprocessedTree& pt, ServerConfiguration& config, NodeId q) {
    VirtualNodeSet nodes;
    VirtualTree tree;
    PhaseAnnotation ann;
    return serve(pt, config, q, EngineOptions{}, nodes, tree, ann);
}

Engine::Engine(const PreprocessedTree& pt, ServerConfiguration config, EngineOptions options)
    : pt_(&pt), config_(std::move(config)), options_(options) {
    if (config_.node_count() != pt.size()) {
        throw Error(ErrorCode::BadParams, "configuration built for a different tree size");
    }
}

QueryOutcome Engine::process(NodeId q) {
    return serve(*pt_, config_, q, options_, nodes_, tree_, annotation_);
}

}  // namespace kserver
