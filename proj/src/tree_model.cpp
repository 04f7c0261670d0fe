#include "kserver/tree_model.hpp"

#include <numeric>
#include <string>

namespace kserver {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NodeOutOfRange: return "NodeOutOfRange";
        case ErrorCode::DepthOutOfRange: return "DepthOutOfRange";
        case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
        case ErrorCode::CycleDetected: return "CycleDetected";
        case ErrorCode::CountMismatch: return "CountMismatch";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::BadParams: return "BadParams";
        case ErrorCode::MoveTooFar: return "MoveTooFar";
        case ErrorCode::InternalInvariantViolation: return "InternalInvariantViolation";
        case ErrorCode::NonTermination: return "NonTermination";
        case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
        case ErrorCode::SanityBoundViolated: return "SanityBoundViolated";
        case ErrorCode::MismatchFound: return "MismatchFound";
    }
    return "Unknown";
}

namespace {

struct DisjointSets {
    std::vector<std::int32_t> parent;

    explicit DisjointSets(std::int32_t n) : parent(n + 1) {
        std::iota(parent.begin(), parent.end(), 0);
    }

    std::int32_t find(std::int32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    bool unite(std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

}  // namespace

void RootedTree::check(NodeId v) const {
    if (!contains(v)) {
        throw Error(ErrorCode::NodeOutOfRange,
                    "node " + std::to_string(v.value) + " not in [1, " + std::to_string(n_) + "]");
    }
}

namespace {

/// Names the first defect of an edge list that is not a tree on [1, n].
[[noreturn]] void reject(std::int32_t n, std::span<const Edge> edges) {
    DisjointSets components(n);
    for (const auto& [a, b] : edges) {
        if (!components.unite(a.value, b.value)) {
            throw Error(ErrorCode::CycleDetected, "edge (" + std::to_string(a.value) + ", " +
                                                      std::to_string(b.value) + ") closes a cycle");
        }
    }
    throw Error(ErrorCode::DisconnectedGraph, std::to_string(edges.size()) + " edges cannot connect " +
                                                  std::to_string(n) + " nodes");
}

}  // namespace

RootedTree RootedTree::build(std::int32_t n, std::span<const Edge> edges) {
    if (n < 1) throw Error(ErrorCode::BadParams, "tree needs at least one node");
    for (const auto& [a, b] : edges) {
        for (NodeId v : {a, b}) {
            if (v.value < 1 || v.value > n) {
                throw Error(ErrorCode::NodeOutOfRange, "edge endpoint " + std::to_string(v.value) +
                                                           " not in [1, " + std::to_string(n) + "]");
            }
        }
    }
    // n - 1 edges reaching every node from the root form a tree; anything
    // else is classified by reject().
    if (static_cast<std::int64_t>(edges.size()) != n - 1) reject(n, edges);

    // Undirected CSR adjacency; neighbours keep edge-list order.
    std::vector<std::int32_t> offset(n + 2, 0);
    for (const auto& [a, b] : edges) {
        ++offset[a.value + 1];
        ++offset[b.value + 1];
    }
    std::partial_sum(offset.begin(), offset.end(), offset.begin());
    std::vector<std::int32_t> adjacency(offset[n + 1]);
    {
        std::vector<std::int32_t> cursor(offset.begin(), offset.end() - 1);
        for (const auto& [a, b] : edges) {
            adjacency[cursor[a.value]++] = b.value;
            adjacency[cursor[b.value]++] = a.value;
        }
    }

    // BFS from the root. The queue doubles as the child list: the children
    // of each node are appended together, in edge-list order.
    RootedTree tree;
    tree.n_ = n;
    tree.parent_.assign(n + 1, NodeId{});
    tree.child_range_.assign(n + 1, {0, 0});
    auto& queue = tree.child_list_;
    queue.reserve(n);
    tree.bfs_parent_.reserve(n);
    tree.bfs_parent_.push_back(0);
    std::vector<std::uint8_t> seen(n + 1, 0);
    queue.push_back(RootedTree::root());
    seen[1] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const auto v = queue[head].value;
        const auto first = static_cast<std::int32_t>(queue.size());
        for (auto i = offset[v]; i < offset[v + 1]; ++i) {
            const auto u = adjacency[i];
            if (seen[u]) continue;
            seen[u] = 1;
            tree.parent_[u] = NodeId{v};
            queue.push_back(NodeId{u});
            tree.bfs_parent_.push_back(static_cast<std::int32_t>(head));
        }
        tree.child_range_[v] = {first, static_cast<std::int32_t>(queue.size()) - first};
    }
    if (static_cast<std::int32_t>(queue.size()) != n) reject(n, edges);
    return tree;
}

TraversalIndex compute_traversal(const RootedTree& tree) {
    const auto n = tree.size();
    const auto bfs = tree.bfs_order();
    const auto parent_pos = tree.bfs_parent();

    // Per BFS position: subtree size, depth, preorder rank.
    std::vector<std::int32_t> size(n, 1);
    for (std::int32_t i = n - 1; i > 0; --i) size[parent_pos[i]] += size[i];
    std::vector<std::int32_t> depth(n, 0);
    std::vector<std::int32_t> rank(n, 0);
    std::vector<std::int32_t> next_rank(n, 1);  // rank of the next child to place
    for (std::int32_t i = 1; i < n; ++i) {
        const auto p = parent_pos[i];
        depth[i] = depth[p] + 1;
        rank[i] = next_rank[p];
        next_rank[p] += size[i];
        next_rank[i] = rank[i] + 1;
    }

    TraversalIndex trav;
    trav.t_in.assign(n + 1, -1);
    trav.t_out.assign(n + 1, -1);
    trav.depth.assign(n + 1, 0);
    trav.preorder.resize(n);
    for (std::int32_t i = 0; i < n; ++i) {
        const auto v = bfs[i].value;
        const auto t_in = 2 * rank[i] - depth[i];
        trav.t_in[v] = t_in;
        trav.t_out[v] = t_in + 2 * size[i] - 1;
        trav.depth[v] = depth[i];
        trav.preorder[rank[i]] = bfs[i];
    }
    trav.counter = 2 * n;
    return trav;
}

bool is_ancestor(const TraversalIndex& trav, NodeId u, NodeId v) {
    for (NodeId x : {u, v}) {
        if (!trav.contains(x)) {
            throw Error(ErrorCode::NodeOutOfRange, "node " + std::to_string(x.value) + " not in tree");
        }
    }
    return is_ancestor_unchecked(trav, u, v);
}

}  // namespace kserver
