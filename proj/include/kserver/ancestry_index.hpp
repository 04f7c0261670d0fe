#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "kserver/tree_model.hpp"

namespace kserver {

/// Range-minimum over a fixed integer array with O(n) preprocessing and O(1)
/// query.
///
/// The array is cut into 64-wide blocks. Inside a block each position keeps a
/// bitmask of the monotone-stack minima ending there, so an in-block query is
/// one mask lookup plus a count-trailing-zeros. Block minima are covered by a
/// sparse table, which has n/64 * log(n/64) entries.
class BlockRmq {
public:
    BlockRmq() = default;
    explicit BlockRmq(std::vector<std::int32_t> values);

    std::int32_t size() const { return static_cast<std::int32_t>(values_.size()); }
    /// Minimum value over [lo, hi], inclusive. Requires lo <= hi.
    std::int32_t min(std::int32_t lo, std::int32_t hi) const;

private:
    static constexpr std::int32_t kBlock = 64;

    std::int32_t in_block(std::int32_t lo, std::int32_t hi) const {
        const auto shifted = masks_[hi] >> (lo % kBlock);
        return values_[lo + std::countr_zero(shifted)];
    }

    std::vector<std::int32_t> values_;
    std::vector<std::uint64_t> masks_;
    std::int32_t blocks_ = 0;
    std::vector<std::int32_t> sparse_;   // level-major, blocks_ entries per level
};

/// Level-ancestor queries in O(1): jump pointers (powers of two) followed by
/// one lookup in the ladder of a long-path decomposition.
///
/// Built over preorder ranks rather than node ids; ladders hold node ids.
/// The jump table has bit_width(max depth) levels, so it stays small on
/// shallow trees.
class LevelAncestor {
public:
    LevelAncestor() = default;
    /// parent_rank[i] is the rank of the parent of the node at rank i (any
    /// value for the root at rank 0); order[i] is the node at rank i.
    LevelAncestor(std::span<const std::int32_t> parent_rank, std::span<const NodeId> order);

    /// Ancestor at depth d of the node at `rank`, which has depth `depth`.
    /// Caller guarantees 0 <= d <= depth.
    NodeId query(std::int32_t rank, std::int32_t depth, std::int32_t d) const {
        const std::int32_t up = depth - d;
        const int h = std::bit_width(static_cast<std::uint32_t>(up)) - 1;
        const std::int32_t w = up == 0 ? rank : jump_[static_cast<std::size_t>(h) * stride_ + rank];
        const std::int32_t path = path_of_[w];
        return ladder_[ladder_begin_[path] + (d - ladder_top_depth_[path])];
    }

private:
    std::size_t stride_ = 0;
    std::vector<std::int32_t> jump_;   // level-major: jump_[h * stride_ + i] = rank of the 2^h-th ancestor
    std::vector<std::int32_t> path_of_;
    std::vector<std::int32_t> ladder_begin_;
    std::vector<std::int32_t> ladder_top_depth_;
    std::vector<NodeId> ladder_;
};

/// Constant-time LCA, level ancestor and distance over a preprocessed tree.
///
/// LCA uses the preorder form of the Euler-tour reduction: for u != v with
/// pre(u) < pre(v), lca(u, v) is the node whose preorder rank is the minimum of
/// pre(parent(w)) over w in preorder positions (pre(u), pre(v)].
class AncestryIndex {
public:
    AncestryIndex() = default;
    AncestryIndex(const RootedTree& tree, const TraversalIndex& trav);

    std::int32_t size() const { return static_cast<std::int32_t>(depth_.size()) - 1; }
    bool contains(NodeId v) const { return v.value >= 1 && v.value <= size(); }
    void check(NodeId v) const;

    std::int32_t depth(NodeId v) const { return depth_[v.value]; }

    /// Throw NodeOutOfRange.
    NodeId lca(NodeId u, NodeId v) const;
    Length dist(NodeId u, NodeId v) const;
    /// Throws NodeOutOfRange or DepthOutOfRange.
    NodeId la(NodeId v, std::int32_t d) const;

    NodeId lca_unchecked(NodeId u, NodeId v) const {
        if (u == v) return u;
        auto a = pre_[u.value];
        auto b = pre_[v.value];
        if (a > b) std::swap(a, b);
        return order_[rmq_.min(a + 1, b)];
    }
    std::int32_t dist_unchecked(NodeId u, NodeId v) const {
        return depth_[u.value] + depth_[v.value] - 2 * depth_[lca_unchecked(u, v).value];
    }
    NodeId la_unchecked(NodeId v, std::int32_t d) const {
        if (d == depth_[v.value]) return v;
        return la_.query(pre_[v.value], depth_[v.value], d);
    }

private:
    std::vector<std::int32_t> depth_;  // [n+1]
    std::vector<std::int32_t> pre_;    // [n+1], preorder rank
    std::vector<NodeId> order_;        // [n], node at each preorder rank
    BlockRmq rmq_;
    LevelAncestor la_;
};

/// The full preprocessing bundle: tree, timestamps and ancestry structures.
struct PreprocessedTree {
    RootedTree tree;
    TraversalIndex traversal;
    AncestryIndex ancestry;

    std::int32_t size() const { return tree.size(); }
};

PreprocessedTree preprocess(RootedTree tree);

/// Longest path length in edges (two farthest-node sweeps).
Length tree_diameter(const PreprocessedTree& pt);

}  // namespace kserver
