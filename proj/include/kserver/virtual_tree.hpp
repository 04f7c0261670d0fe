#pragma once

#include <span>
#include <string>
#include <vector>

#include "kserver/ancestry_index.hpp"

namespace kserver {

/// Server and query nodes plus the LCAs of DFS-order-adjacent pairs.
/// All three lists are duplicate-free and sorted by t_in.
struct VirtualNodeSet {
    std::vector<NodeId> v_s;
    std::vector<NodeId> v_olca;
    std::vector<NodeId> v_lca;
};

/// Edge produced by the stack sweep, oriented by the original root.
struct VirtualEdge {
    NodeId upper;
    NodeId lower;
    std::int32_t weight;
};

/// Compressed weighted tree over V^lca, re-rooted at the query node.
///
/// Nodes are addressed by dense local indices in [0, size()); local index i
/// is `nodes[i]`, and `nodes` is sorted by t_in so `local_index` is a binary
/// search.
struct VirtualTree {
    std::vector<NodeId> nodes;
    std::vector<std::int32_t> node_t_in;
    std::vector<VirtualEdge> edges;

    std::int32_t root = -1;
    std::vector<std::int32_t> parent;        // -1 at the root
    std::vector<std::int32_t> parent_weight; // w(v, parent(v)); 0 at the root
    std::vector<std::int32_t> child_offset;  // CSR, size() + 1 entries
    std::vector<std::int32_t> child_list;
    std::vector<std::int32_t> preorder;      // from the root; reverse is a valid post-order

    // Buffers reused across builds; contents are meaningless outside a build.
    struct Scratch {
        std::vector<std::int32_t> stack, upper, lower;
        std::vector<std::int32_t> adj_offset, adj, adj_weight, cursor;
    } scratch;

    std::int32_t size() const { return static_cast<std::int32_t>(nodes.size()); }
    NodeId root_node() const { return nodes[root]; }

    std::span<const std::int32_t> children(std::int32_t local) const {
        return {child_list.data() + child_offset[local],
                static_cast<std::size_t>(child_offset[local + 1] - child_offset[local])};
    }

    /// -1 when the node is not part of the virtual tree.
    std::int32_t local_index(NodeId v, const TraversalIndex& trav) const;
};

VirtualNodeSet collect_virtual_nodes(const AncestryIndex& index, const TraversalIndex& trav,
                                     std::span<const NodeId> servers, NodeId q);
/// Reuses the capacity of `out`.
void collect_virtual_nodes(const AncestryIndex& index, const TraversalIndex& trav,
                           std::span<const NodeId> servers, NodeId q, VirtualNodeSet& out);

VirtualTree build_virtual_tree(const VirtualNodeSet& set, const TraversalIndex& trav,
                               const AncestryIndex& index, NodeId q);
/// Reuses the capacity of `out`.
void build_virtual_tree(const VirtualNodeSet& set, const TraversalIndex& trav, const AncestryIndex& index,
                        NodeId q, VirtualTree& out);

/// One "upper lower weight" line per sweep edge, for debugging.
std::string dump_virtual_tree(const VirtualTree& vt);

}  // namespace kserver
