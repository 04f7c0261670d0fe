#include "kserver/virtual_tree.hpp"

#include <algorithm>
#include <sstream>

namespace kserver {

namespace {

void sort_unique_by_t_in(std::vector<NodeId>& nodes, const TraversalIndex& trav) {
    const auto by_t_in = [&](NodeId a, NodeId b) { return trav.t_in[a.value] < trav.t_in[b.value]; };
    std::sort(nodes.begin(), nodes.end(), by_t_in);
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
}

}  // namespace

std::int32_t VirtualTree::local_index(NodeId v, const TraversalIndex& trav) const {
    if (!trav.contains(v)) return -1;
    const auto key = trav.t_in[v.value];
    const auto it = std::lower_bound(node_t_in.begin(), node_t_in.end(), key);
    if (it == node_t_in.end() || *it != key) return -1;
    return static_cast<std::int32_t>(it - node_t_in.begin());
}

void collect_virtual_nodes(const AncestryIndex& index, const TraversalIndex& trav,
                           std::span<const NodeId> servers, NodeId q, VirtualNodeSet& out) {
    if (servers.empty()) throw Error(ErrorCode::BadParams, "virtual tree needs at least one server");
    index.check(q);
    for (NodeId v : servers) index.check(v);

    out.v_s.assign(servers.begin(), servers.end());
    out.v_s.push_back(q);
    sort_unique_by_t_in(out.v_s, trav);

    out.v_olca.clear();
    for (std::size_t j = 0; j + 1 < out.v_s.size(); ++j) {
        out.v_olca.push_back(index.lca_unchecked(out.v_s[j], out.v_s[j + 1]));
    }
    sort_unique_by_t_in(out.v_olca, trav);

    out.v_lca.resize(out.v_s.size() + out.v_olca.size());
    const auto by_t_in = [&](NodeId a, NodeId b) { return trav.t_in[a.value] < trav.t_in[b.value]; };
    std::merge(out.v_s.begin(), out.v_s.end(), out.v_olca.begin(), out.v_olca.end(), out.v_lca.begin(), by_t_in);
    out.v_lca.erase(std::unique(out.v_lca.begin(), out.v_lca.end()), out.v_lca.end());
}

VirtualNodeSet collect_virtual_nodes(const AncestryIndex& index, const TraversalIndex& trav,
                                     std::span<const NodeId> servers, NodeId q) {
    VirtualNodeSet out;
    collect_virtual_nodes(index, trav, servers, q, out);
    return out;
}

void build_virtual_tree(const VirtualNodeSet& set, const TraversalIndex& trav, const AncestryIndex& index,
                        NodeId q, VirtualTree& out) {
    const auto& nodes = set.v_lca;
    const auto size = static_cast<std::int32_t>(nodes.size());

    out.nodes.assign(nodes.begin(), nodes.end());
    out.node_t_in.resize(size);
    for (std::int32_t i = 0; i < size; ++i) out.node_t_in[i] = trav.t_in[nodes[i].value];

    // Stack sweep in t_in order: drop non-ancestors, link to the surviving top.
    out.edges.clear();
    auto& stack = out.scratch.stack;
    auto& sweep_upper = out.scratch.upper;  // local index of each edge's upper end
    auto& sweep_lower = out.scratch.lower;
    stack.clear();
    sweep_upper.clear();
    sweep_lower.clear();
    for (std::int32_t i = 0; i < size; ++i) {
        while (!stack.empty() && !is_ancestor_unchecked(trav, nodes[stack.back()], nodes[i])) stack.pop_back();
        if (!stack.empty()) {
            const auto top = stack.back();
            out.edges.push_back({nodes[top], nodes[i], index.dist_unchecked(nodes[top], nodes[i])});
            sweep_upper.push_back(top);
            sweep_lower.push_back(i);
        }
        stack.push_back(i);
    }
    if (static_cast<std::int32_t>(out.edges.size()) != size - 1) {
        throw Error(ErrorCode::InternalInvariantViolation,
                    "stack sweep produced " + std::to_string(out.edges.size()) + " edges for " +
                        std::to_string(size) + " virtual nodes");
    }

    out.root = out.local_index(q, trav);
    if (out.root < 0) throw Error(ErrorCode::InternalInvariantViolation, "query node missing from virtual tree");

    // Undirected adjacency, then a traversal from q to orient it.
    auto& adj_offset = out.scratch.adj_offset;
    adj_offset.assign(size + 1, 0);
    for (std::size_t e = 0; e < out.edges.size(); ++e) {
        ++adj_offset[sweep_upper[e] + 1];
        ++adj_offset[sweep_lower[e] + 1];
    }
    for (std::int32_t i = 0; i < size; ++i) adj_offset[i + 1] += adj_offset[i];
    auto& adj = out.scratch.adj;
    auto& adj_weight = out.scratch.adj_weight;
    adj.resize(adj_offset[size]);
    adj_weight.resize(adj_offset[size]);
    {
        auto& cursor = out.scratch.cursor;
        cursor.assign(adj_offset.begin(), adj_offset.end() - 1);
        for (std::size_t e = 0; e < out.edges.size(); ++e) {
            const auto a = sweep_upper[e];
            const auto b = sweep_lower[e];
            adj_weight[cursor[a]] = out.edges[e].weight;
            adj[cursor[a]++] = b;
            adj_weight[cursor[b]] = out.edges[e].weight;
            adj[cursor[b]++] = a;
        }
    }

    out.parent.assign(size, -1);
    out.parent_weight.assign(size, 0);
    out.child_offset.assign(size + 1, 0);
    for (std::int32_t i = 0; i < size; ++i) {
        out.child_offset[i + 1] = out.child_offset[i] + (adj_offset[i + 1] - adj_offset[i]) - (i == out.root ? 0 : 1);
    }
    out.child_list.resize(size > 0 ? size - 1 : 0);
    out.preorder.clear();

    stack.clear();
    stack.push_back(out.root);
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        out.preorder.push_back(v);
        auto slot = out.child_offset[v];
        for (auto i = adj_offset[v]; i < adj_offset[v + 1]; ++i) {
            const auto u = adj[i];
            if (u == out.parent[v]) continue;
            out.parent[u] = v;
            out.parent_weight[u] = adj_weight[i];
            out.child_list[slot++] = u;
        }
        const auto kids = out.children(v);
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }
}

VirtualTree build_virtual_tree(const VirtualNodeSet& set, const TraversalIndex& trav, const AncestryIndex& index,
                               NodeId q) {
    VirtualTree out;
    build_virtual_tree(set, trav, index, q, out);
    return out;
}

std::string dump_virtual_tree(const VirtualTree& vt) {
    std::ostringstream os;
    for (const auto& e : vt.edges) os << e.upper << ' ' << e.lower << ' ' << e.weight << '\n';
    return os.str();
}

}  // namespace kserver
