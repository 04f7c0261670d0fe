#include "kserver/ancestry_index.hpp"

#include <algorithm>
#include <string>

namespace kserver {

BlockRmq::BlockRmq(std::vector<std::int32_t> values) : values_(std::move(values)) {
    const auto n = size();
    masks_.assign(n, 0);
    blocks_ = (n + kBlock - 1) / kBlock;

    std::vector<std::int32_t> block_min(blocks_);
    for (std::int32_t b = 0; b < blocks_; ++b) {
        const std::int32_t start = b * kBlock;
        const std::int32_t end = std::min(n, start + kBlock);
        std::uint64_t stack = 0;
        for (std::int32_t i = start; i < end; ++i) {
            while (stack != 0) {
                const int top = 63 - std::countl_zero(stack);
                if (values_[start + top] <= values_[i]) break;
                stack ^= std::uint64_t{1} << top;
            }
            stack |= std::uint64_t{1} << (i - start);
            masks_[i] = stack;
        }
        block_min[b] = values_[start + std::countr_zero(masks_[end - 1])];
    }

    const int levels = blocks_ == 0 ? 0 : std::bit_width(static_cast<std::uint32_t>(blocks_));
    sparse_.assign(static_cast<std::size_t>(levels) * blocks_, 0);
    std::copy(block_min.begin(), block_min.end(), sparse_.begin());
    for (int j = 1; j < levels; ++j) {
        const std::int32_t half = 1 << (j - 1);
        const auto* prev = sparse_.data() + static_cast<std::size_t>(j - 1) * blocks_;
        auto* cur = sparse_.data() + static_cast<std::size_t>(j) * blocks_;
        for (std::int32_t i = 0; i + (1 << j) <= blocks_; ++i) cur[i] = std::min(prev[i], prev[i + half]);
    }
}

std::int32_t BlockRmq::min(std::int32_t lo, std::int32_t hi) const {
    const std::int32_t bl = lo / kBlock;
    const std::int32_t br = hi / kBlock;
    if (bl == br) return in_block(lo, hi);

    auto best = std::min(in_block(lo, bl * kBlock + kBlock - 1), in_block(br * kBlock, hi));
    if (bl + 1 < br) {
        const std::int32_t first = bl + 1;
        const std::int32_t count = br - first;
        const int j = std::bit_width(static_cast<std::uint32_t>(count)) - 1;
        const auto* level = sparse_.data() + static_cast<std::size_t>(j) * blocks_;
        best = std::min({best, level[first], level[br - (1 << j)]});
    }
    return best;
}

LevelAncestor::LevelAncestor(std::span<const std::int32_t> parent_rank, std::span<const NodeId> order) {
    const auto n = static_cast<std::int32_t>(order.size());
    // In preorder a parent precedes its children, so one forward pass fixes
    // depths and one backward pass fixes heights.
    std::vector<std::int32_t> depth(n, 0);
    std::vector<std::int32_t> height(n, 0);
    for (std::int32_t i = 1; i < n; ++i) depth[i] = depth[parent_rank[i]] + 1;
    for (std::int32_t i = n - 1; i > 0; --i) {
        auto& h = height[parent_rank[i]];
        h = std::max(h, height[i] + 1);
    }
    std::vector<std::int32_t> long_child(n, -1);
    for (std::int32_t i = 1; i < n; ++i) {
        const auto p = parent_rank[i];
        if (long_child[p] < 0 && height[i] + 1 == height[p]) long_child[p] = i;
    }

    // Long paths, each extended upwards by its own length into a ladder.
    path_of_.assign(n, 0);
    ladder_.reserve(2 * static_cast<std::size_t>(n));
    std::vector<NodeId> scratch;
    for (std::int32_t head = 0; head < n; ++head) {
        if (head > 0 && long_child[parent_rank[head]] == head) continue;

        const auto path = static_cast<std::int32_t>(ladder_begin_.size());
        const std::int32_t top = std::max(0, depth[head] - height[head]);
        ladder_begin_.push_back(static_cast<std::int32_t>(ladder_.size()));
        ladder_top_depth_.push_back(top);

        scratch.clear();
        for (std::int32_t a = head; depth[a] > top;) {
            a = parent_rank[a];
            scratch.push_back(order[a]);
        }
        ladder_.insert(ladder_.end(), scratch.rbegin(), scratch.rend());
        for (std::int32_t v = head; v >= 0; v = long_child[v]) {
            path_of_[v] = path;
            ladder_.push_back(order[v]);
        }
    }

    const std::int32_t max_depth = n == 0 ? 0 : *std::max_element(depth.begin(), depth.end());
    const int levels = std::max(1, static_cast<int>(std::bit_width(static_cast<std::uint32_t>(max_depth))));
    stride_ = static_cast<std::size_t>(n);
    jump_.resize(stride_ * levels);
    std::copy(parent_rank.begin(), parent_rank.end(), jump_.begin());
    if (n > 0) jump_[0] = 0;
    for (int h = 1; h < levels; ++h) {
        const auto* prev = jump_.data() + (h - 1) * stride_;
        auto* cur = jump_.data() + h * stride_;
        for (std::int32_t i = 0; i < n; ++i) cur[i] = prev[prev[i]];
    }
}

AncestryIndex::AncestryIndex(const RootedTree& tree, const TraversalIndex& trav)
    : depth_(trav.depth), order_(trav.preorder) {
    const auto n = tree.size();
    pre_.assign(n + 1, 0);
    for (std::int32_t i = 0; i < n; ++i) pre_[order_[i].value] = i;

    std::vector<std::int32_t> parent_rank(n, 0);
    for (std::int32_t i = 1; i < n; ++i) parent_rank[i] = pre_[tree.parent(order_[i]).value];
    la_ = LevelAncestor(parent_rank, order_);
    rmq_ = BlockRmq(std::move(parent_rank));
}

void AncestryIndex::check(NodeId v) const {
    if (!contains(v)) {
        throw Error(ErrorCode::NodeOutOfRange,
                    "node " + std::to_string(v.value) + " not in [1, " + std::to_string(size()) + "]");
    }
}

NodeId AncestryIndex::lca(NodeId u, NodeId v) const {
    check(u);
    check(v);
    return lca_unchecked(u, v);
}

Length AncestryIndex::dist(NodeId u, NodeId v) const {
    check(u);
    check(v);
    return dist_unchecked(u, v);
}

NodeId AncestryIndex::la(NodeId v, std::int32_t d) const {
    check(v);
    if (d < 0 || d > depth_[v.value]) {
        throw Error(ErrorCode::DepthOutOfRange, "depth " + std::to_string(d) + " not in [0, " +
                                                    std::to_string(depth_[v.value]) + "] for node " +
                                                    std::to_string(v.value));
    }
    return la_unchecked(v, d);
}

PreprocessedTree preprocess(RootedTree tree) {
    auto trav = compute_traversal(tree);
    AncestryIndex ancestry(tree, trav);
    return PreprocessedTree{std::move(tree), std::move(trav), std::move(ancestry)};
}

Length tree_diameter(const PreprocessedTree& pt) {
    const auto n = pt.size();
    const auto& ai = pt.ancestry;
    NodeId far{1};
    for (std::int32_t v = 2; v <= n; ++v) {
        if (ai.depth(NodeId{v}) > ai.depth(far)) far = NodeId{v};
    }
    Length best = 0;
    for (std::int32_t v = 1; v <= n; ++v) best = std::max<Length>(best, ai.dist_unchecked(far, NodeId{v}));
    return best;
}

}  // namespace kserver
