#pragma once

#include <span>
#include <utility>
#include <vector>

#include "kserver/types.hpp"

namespace kserver {

using Edge = std::pair<NodeId, NodeId>;

/// Immutable rooted tree over nodes 1..n, rooted at node 1.
///
/// Built from an undirected edge list by orienting every edge away from the
/// root. The children of a node keep the order in which their edges first
/// appear in the input, and every DFS in the library walks them in that order.
class RootedTree {
public:
    static RootedTree build(std::int32_t n, std::span<const Edge> edges);

    std::int32_t size() const { return n_; }
    static constexpr NodeId root() { return NodeId{1}; }

    bool contains(NodeId v) const { return v.value >= 1 && v.value <= n_; }
    /// Throws NodeOutOfRange.
    void check(NodeId v) const;

    /// NodeId{0} for the root.
    NodeId parent(NodeId v) const { return parent_[v.value]; }
    std::span<const NodeId> children(NodeId v) const {
        const auto [begin, count] = child_range_[v.value];
        return {child_list_.data() + begin, static_cast<std::size_t>(count)};
    }
    /// All nodes in BFS order from the root; children(v) is a slice of it.
    std::span<const NodeId> bfs_order() const { return child_list_; }
    /// BFS position of the parent of the node at each BFS position (0 for
    /// the root). Non-decreasing.
    std::span<const std::int32_t> bfs_parent() const { return bfs_parent_; }

private:
    RootedTree() = default;

    std::int32_t n_ = 0;
    std::vector<NodeId> parent_;             // [n+1], slot 0 unused
    std::vector<std::pair<std::int32_t, std::int32_t>> child_range_;  // [n+1], (begin, count) in child_list_
    std::vector<NodeId> child_list_;  // BFS order; siblings are contiguous
    std::vector<std::int32_t> bfs_parent_;  // [n]
};

/// Entry/exit timestamps and root distances from one DFS pass.
///
/// A single counter is advanced on every enter and every leave event, so the
/// 2n stamps are exactly 0..2n-1.
struct TraversalIndex {
    std::vector<std::int32_t> t_in;      // [n+1]
    std::vector<std::int32_t> t_out;     // [n+1]
    std::vector<std::int32_t> depth;     // [n+1], depth(1) = 0
    std::vector<NodeId> preorder;        // nodes in order of t_in
    std::int32_t counter = 0;            // final timer value, always 2n

    std::int32_t size() const { return static_cast<std::int32_t>(preorder.size()); }
    bool contains(NodeId v) const { return v.value >= 1 && v.value <= size(); }
};

/// Stamps of a DFS that visits children in order. Computed without a stack
/// from BFS-order passes: with pre = preorder rank and size = subtree size,
/// t_in = 2 pre - depth and t_out = t_in + 2 size - 1.
TraversalIndex compute_traversal(const RootedTree& tree);

/// u is an ancestor of v (self included). Throws NodeOutOfRange.
bool is_ancestor(const TraversalIndex& trav, NodeId u, NodeId v);

inline bool is_ancestor_unchecked(const TraversalIndex& trav, NodeId u, NodeId v) {
    return trav.t_in[u.value] <= trav.t_in[v.value] && trav.t_out[v.value] <= trav.t_out[u.value];
}

}  // namespace kserver
