#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "kserver/virtual_tree.hpp"
#include "../support/brute_force.hpp"

namespace kserver {
namespace {

std::vector<std::int32_t> ids(const std::vector<NodeId>& nodes) {
    std::vector<std::int32_t> out;
    for (auto v : nodes) out.push_back(v.value);
    return out;
}

std::vector<NodeId> nodes_of(std::initializer_list<int> list) {
    std::vector<NodeId> out;
    for (auto v : list) out.emplace_back(v);
    return out;
}

std::set<std::int32_t> children_set(const VirtualTree& vt, std::int32_t node, const TraversalIndex& trav) {
    std::set<std::int32_t> out;
    for (auto c : vt.children(vt.local_index(NodeId{node}, trav))) out.insert(vt.nodes[c].value);
    return out;
}

TEST(CollectVirtualNodes, SingleServerOnQuery) {
    const auto pt = testing::t7();
    const auto set = collect_virtual_nodes(pt.ancestry, pt.traversal, nodes_of({3}), NodeId{3});
    EXPECT_EQ(ids(set.v_s), (std::vector<std::int32_t>{3}));
    EXPECT_TRUE(set.v_olca.empty());
    EXPECT_EQ(ids(set.v_lca), (std::vector<std::int32_t>{3}));
}

TEST(CollectVirtualNodes, PathEnds) {
    const auto pt = testing::p5();
    const auto set = collect_virtual_nodes(pt.ancestry, pt.traversal, nodes_of({5}), NodeId{1});
    EXPECT_EQ(ids(set.v_s), (std::vector<std::int32_t>{1, 5}));
    EXPECT_EQ(ids(set.v_olca), (std::vector<std::int32_t>{1}));
    EXPECT_EQ(ids(set.v_lca), (std::vector<std::int32_t>{1, 5}));
}

TEST(CollectVirtualNodes, T7Example) {
    const auto pt = testing::t7();
    const auto set = collect_virtual_nodes(pt.ancestry, pt.traversal, nodes_of({4, 7}), NodeId{5});
    EXPECT_EQ(ids(set.v_s), (std::vector<std::int32_t>{4, 5, 7}));
    EXPECT_EQ(ids(set.v_olca), (std::vector<std::int32_t>{1, 2}));
    EXPECT_EQ(ids(set.v_lca), (std::vector<std::int32_t>{1, 2, 4, 5, 7}));
}

TEST(CollectVirtualNodes, CoLocatedServersCollapse) {
    const auto pt = testing::t7();
    const auto set = collect_virtual_nodes(pt.ancestry, pt.traversal, nodes_of({4, 4, 4}), NodeId{4});
    EXPECT_EQ(ids(set.v_s), (std::vector<std::int32_t>{4}));
    EXPECT_EQ(ids(set.v_lca), (std::vector<std::int32_t>{4}));
}

TEST(CollectVirtualNodes, Errors) {
    const auto pt = testing::t7();
    EXPECT_THROW(collect_virtual_nodes(pt.ancestry, pt.traversal, nodes_of({9}), NodeId{1}), Error);
    EXPECT_THROW(collect_virtual_nodes(pt.ancestry, pt.traversal, nodes_of({1}), NodeId{0}), Error);
    EXPECT_THROW(collect_virtual_nodes(pt.ancestry, pt.traversal, {}, NodeId{1}), Error);
}

TEST(BuildVirtualTree, SingleNode) {
    const auto pt = testing::t7();
    const auto set = collect_virtual_nodes(pt.ancestry, pt.traversal, nodes_of({6}), NodeId{6});
    const auto vt = build_virtual_tree(set, pt.traversal, pt.ancestry, NodeId{6});
    EXPECT_EQ(vt.size(), 1);
    EXPECT_TRUE(vt.edges.empty());
    EXPECT_EQ(vt.root_node(), NodeId{6});
}

TEST(BuildVirtualTree, PathSingleEdge) {
    const auto pt = testing::p5();
    const auto set = collect_virtual_nodes(pt.ancestry, pt.traversal, nodes_of({5}), NodeId{1});
    const auto vt = build_virtual_tree(set, pt.traversal, pt.ancestry, NodeId{1});
    ASSERT_EQ(vt.edges.size(), 1u);
    EXPECT_EQ(vt.edges[0].upper, NodeId{1});
    EXPECT_EQ(vt.edges[0].lower, NodeId{5});
    EXPECT_EQ(vt.edges[0].weight, 4);
    EXPECT_EQ(vt.root_node(), NodeId{1});
}

TEST(BuildVirtualTree, T7RerootedAtQuery) {
    const auto pt = testing::t7();
    const auto set = collect_virtual_nodes(pt.ancestry, pt.traversal, nodes_of({4, 7}), NodeId{5});
    const auto vt = build_virtual_tree(set, pt.traversal, pt.ancestry, NodeId{5});

    std::set<std::tuple<int, int, int>> edges;
    for (const auto& e : vt.edges) edges.emplace(e.upper.value, e.lower.value, e.weight);
    EXPECT_EQ(edges, (std::set<std::tuple<int, int, int>>{{1, 2, 1}, {2, 4, 1}, {2, 5, 1}, {1, 7, 2}}));

    EXPECT_EQ(vt.root_node(), NodeId{5});
    EXPECT_EQ(children_set(vt, 5, pt.traversal), (std::set<std::int32_t>{2}));
    EXPECT_EQ(children_set(vt, 2, pt.traversal), (std::set<std::int32_t>{1, 4}));
    EXPECT_EQ(children_set(vt, 1, pt.traversal), (std::set<std::int32_t>{7}));
    EXPECT_TRUE(children_set(vt, 7, pt.traversal).empty());
    EXPECT_EQ(vt.parent_weight[vt.local_index(NodeId{7}, pt.traversal)], 2);
    EXPECT_EQ(vt.local_index(NodeId{3}, pt.traversal), -1);
    EXPECT_EQ(dump_virtual_tree(vt), "1 2 1\n2 4 1\n2 5 1\n1 7 2\n");
}

struct RandomInstance {
    PreprocessedTree pt;
    std::vector<NodeId> servers;
    NodeId q;
};

RandomInstance random_instance(std::mt19937_64& rng, std::int32_t max_n, std::int32_t max_k) {
    const auto n = std::uniform_int_distribution<std::int32_t>(1, max_n)(rng);
    const auto k = std::uniform_int_distribution<std::int32_t>(1, max_k)(rng);
    RandomInstance inst{preprocess(RootedTree::build(n, testing::random_edges(n, rng))), {}, NodeId{}};
    std::uniform_int_distribution<std::int32_t> node(1, n);
    for (std::int32_t i = 0; i < k; ++i) inst.servers.emplace_back(node(rng));
    inst.q = NodeId{node(rng)};
    return inst;
}

// Pairwise-LCA closure equals V^s plus adjacent-pair LCAs, and the size stays
// within [|V^s|, 2|V^s|].
TEST(VirtualNodeSetProperty, PairwiseLcaClosure) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto inst = random_instance(rng, 200, 10);
        const auto walk = testing::walker(inst.pt.tree);
        const auto set = collect_virtual_nodes(inst.pt.ancestry, inst.pt.traversal, inst.servers, inst.q);

        std::set<std::int32_t> brute;
        for (auto u : set.v_s) {
            for (auto v : set.v_s) brute.insert(walk.lca(u.value, v.value));
        }
        std::set<std::int32_t> joined;
        for (auto v : set.v_s) joined.insert(v.value);
        for (auto v : set.v_olca) joined.insert(v.value);
        ASSERT_EQ(brute, joined);
        const auto lca_ids = ids(set.v_lca);
        ASSERT_EQ(std::set<std::int32_t>(lca_ids.begin(), lca_ids.end()), joined);

        ASSERT_LE(set.v_s.size(), set.v_lca.size());
        ASSERT_LE(set.v_lca.size(), 2 * set.v_s.size());
        for (std::size_t i = 1; i < set.v_lca.size(); ++i) {
            ASSERT_LT(inst.pt.traversal.t_in[set.v_lca[i - 1].value], inst.pt.traversal.t_in[set.v_lca[i].value]);
        }
    }
}

// Edges are exactly the V^lca pairs with no other V^lca node on their
// original path, weights are original distances, and virtual path sums
// reproduce every pairwise original distance.
TEST(VirtualTreeProperty, FidelityAgainstBruteForce) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const auto inst = random_instance(rng, 100, 10);
        const auto walk = testing::walker(inst.pt.tree);
        const auto set = collect_virtual_nodes(inst.pt.ancestry, inst.pt.traversal, inst.servers, inst.q);
        const auto vt = build_virtual_tree(set, inst.pt.traversal, inst.pt.ancestry, inst.q);
        ASSERT_EQ(vt.edges.size() + 1, set.v_lca.size());
        ASSERT_EQ(vt.root_node(), inst.q);

        const auto node_ids = ids(vt.nodes);
        const std::set<std::int32_t> members(node_ids.begin(), node_ids.end());
        std::set<std::pair<std::int32_t, std::int32_t>> expected_edges;
        for (auto a : members) {
            for (auto b : members) {
                if (a >= b) continue;
                const auto path = walk.path(a, b);
                const bool clear = std::none_of(path.begin() + 1, path.end() - 1,
                                                [&](std::int32_t x) { return members.count(x) > 0; });
                if (clear) expected_edges.emplace(a, b);
            }
        }
        std::set<std::pair<std::int32_t, std::int32_t>> actual_edges;
        for (const auto& e : vt.edges) {
            ASSERT_EQ(e.weight, walk.dist(e.upper.value, e.lower.value));
            actual_edges.emplace(std::min(e.upper.value, e.lower.value), std::max(e.upper.value, e.lower.value));
        }
        ASSERT_EQ(actual_edges, expected_edges);

        // Root-to-node weight sums in the re-rooted tree give dist(q, v);
        // pairwise sums go through the virtual LCA.
        std::vector<std::int64_t> from_root(vt.size(), 0);
        std::vector<std::int32_t> depth(vt.size(), 0);
        for (auto v : vt.preorder) {
            if (vt.parent[v] < 0) continue;
            from_root[v] = from_root[vt.parent[v]] + vt.parent_weight[v];
            depth[v] = depth[vt.parent[v]] + 1;
        }
        for (std::int32_t a = 0; a < vt.size(); ++a) {
            for (std::int32_t b = 0; b < vt.size(); ++b) {
                auto x = a, y = b;
                std::int64_t sum = 0;
                while (x != y) {
                    if (depth[x] >= depth[y]) {
                        sum += vt.parent_weight[x];
                        x = vt.parent[x];
                    } else {
                        sum += vt.parent_weight[y];
                        y = vt.parent[y];
                    }
                }
                ASSERT_EQ(sum, walk.dist(vt.nodes[a].value, vt.nodes[b].value));
            }
        }
    }
}

TEST(VirtualTree, BufferReuseGivesSameResult) {
    std::mt19937_64 rng(5);
    VirtualNodeSet set;
    VirtualTree reused;
    for (int trial = 0; trial < 200; ++trial) {
        const auto inst = random_instance(rng, 60, 12);
        collect_virtual_nodes(inst.pt.ancestry, inst.pt.traversal, inst.servers, inst.q, set);
        build_virtual_tree(set, inst.pt.traversal, inst.pt.ancestry, inst.q, reused);
        const auto fresh = build_virtual_tree(set, inst.pt.traversal, inst.pt.ancestry, inst.q);
        ASSERT_EQ(dump_virtual_tree(reused), dump_virtual_tree(fresh));
        ASSERT_EQ(reused.parent, fresh.parent);
        ASSERT_EQ(reused.child_list, fresh.child_list);
    }
}

}  // namespace
}  // namespace kserver
