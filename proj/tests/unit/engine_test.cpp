#include <gtest/gtest.h>

#include <limits>
#include <map>
#include <random>

#include "kserver/engine.hpp"
#include "kserver/oracles.hpp"
#include "../support/brute_force.hpp"

namespace kserver {
namespace {

std::vector<NodeId> nodes_of(std::initializer_list<int> list) {
    std::vector<NodeId> out;
    for (auto v : list) out.emplace_back(v);
    return out;
}

ServerId sid(int v) { return ServerId{v}; }

std::map<int, std::pair<int, Length>> annotation_by_node(const VirtualTree& vt, const PhaseAnnotation& ann) {
    std::map<int, std::pair<int, Length>> out;
    for (std::int32_t i = 0; i < vt.size(); ++i) out[vt.nodes[i].value] = {ann.closest[i].value, ann.dist_to_closest[i]};
    return out;
}

TEST(ServerConfiguration, OccupantsStaySortedAndInverse) {
    ServerConfiguration config(7, nodes_of({4, 2, 4, 4}));
    const auto at4 = config.occupants(NodeId{4});
    EXPECT_EQ(std::vector<ServerId>(at4.begin(), at4.end()), (std::vector<ServerId>{sid(1), sid(3), sid(4)}));
    EXPECT_EQ(config.min_occupant(NodeId{2}), sid(2));
    EXPECT_FALSE(config.min_occupant(NodeId{5}).has_value());

    config.relocate(sid(1), NodeId{5});
    EXPECT_EQ(config.min_occupant(NodeId{4}), sid(3));
    config.relocate(sid(3), NodeId{5});
    config.relocate(sid(4), NodeId{5});
    EXPECT_FALSE(config.min_occupant(NodeId{4}).has_value());
    const auto at5 = config.occupants(NodeId{5});
    EXPECT_EQ(std::vector<ServerId>(at5.begin(), at5.end()), (std::vector<ServerId>{sid(1), sid(3), sid(4)}));
    EXPECT_TRUE(config.occupancy_consistent());

    EXPECT_THROW(config.relocate(sid(1), NodeId{8}), Error);
    EXPECT_THROW(config.relocate(sid(9), NodeId{1}), Error);
    EXPECT_THROW(ServerConfiguration(7, nodes_of({0})), Error);
    EXPECT_THROW(ServerConfiguration(7, {}), Error);
}

TEST(ClosestComputing, T7TwoServers) {
    const auto pt = testing::t7();
    const ServerConfiguration config(7, nodes_of({4, 7}));
    const auto set = collect_virtual_nodes(pt.ancestry, pt.traversal, config.positions(), NodeId{5});
    const auto vt = build_virtual_tree(set, pt.traversal, pt.ancestry, NodeId{5});
    const auto ann = closest_computing(vt, config);
    const std::map<int, std::pair<int, Length>> expected{{4, {1, 0}}, {7, {2, 0}}, {1, {2, 2}}, {2, {1, 1}}, {5, {1, 2}}};
    EXPECT_EQ(annotation_by_node(vt, ann), expected);
}

TEST(ClosestComputing, OccupiedRootUsesMinIdOccupant) {
    const auto pt = testing::t7();
    const ServerConfiguration config(7, nodes_of({6, 3, 3}));
    const auto set = collect_virtual_nodes(pt.ancestry, pt.traversal, config.positions(), NodeId{3});
    const auto vt = build_virtual_tree(set, pt.traversal, pt.ancestry, NodeId{3});
    const auto ann = closest_computing(vt, config);
    EXPECT_EQ(ann.closest[vt.root], sid(2));
    EXPECT_EQ(ann.dist_to_closest[vt.root], 0);
}

TEST(ClosestComputing, DistanceTieGoesToSmallerId) {
    const auto pt = testing::t7();
    // Listing the larger id first checks the comparator, not the child order.
    for (const auto& positions : {nodes_of({4, 5}), nodes_of({5, 4})}) {
        const ServerConfiguration config(7, positions);
        const auto set = collect_virtual_nodes(pt.ancestry, pt.traversal, config.positions(), NodeId{1});
        const auto vt = build_virtual_tree(set, pt.traversal, pt.ancestry, NodeId{1});
        const auto ann = annotation_by_node(vt, closest_computing(vt, config));
        EXPECT_EQ(ann.at(2), (std::pair<int, Length>{1, 1}));
        EXPECT_EQ(ann.at(1), (std::pair<int, Length>{1, 2}));
    }
}

TEST(ClosestComputing, EmptyLeafIsAnInvariantViolation) {
    const auto pt = testing::t7();
    const ServerConfiguration config(7, nodes_of({4, 7}));
    auto set = collect_virtual_nodes(pt.ancestry, pt.traversal, config.positions(), NodeId{5});
    set.v_lca.push_back(NodeId{6});  // corrupt: a leaf without a server
    std::sort(set.v_lca.begin(), set.v_lca.end(),
              [&](NodeId a, NodeId b) { return pt.traversal.t_in[a.value] < pt.traversal.t_in[b.value]; });
    const auto vt = build_virtual_tree(set, pt.traversal, pt.ancestry, NodeId{5});
    try {
        closest_computing(vt, config);
        FAIL() << "expected InternalInvariantViolation";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InternalInvariantViolation);
    }
}

TEST(MoveServer, Examples) {
    const auto pt = testing::t7();
    ServerConfiguration config(7, nodes_of({7, 4}));
    EXPECT_EQ(move_server(pt.ancestry, config, sid(1), NodeId{5}, 0), NodeId{7});
    EXPECT_EQ(move_server(pt.ancestry, config, sid(1), NodeId{5}, 1), NodeId{3});
    EXPECT_EQ(config.position(sid(1)), NodeId{3});
    EXPECT_EQ(move_server(pt.ancestry, config, sid(2), NodeId{5}, 2), NodeId{5});
    EXPECT_EQ(config.min_occupant(NodeId{5}), sid(2));
    try {
        move_server(pt.ancestry, config, sid(1), NodeId{5}, 4);
        FAIL() << "expected MoveTooFar";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MoveTooFar);
    }
    EXPECT_EQ(config.position(sid(1)), NodeId{3});
}

// Every prefix of every path, against the explicitly enumerated path.
TEST(MoveServer, MatchesEnumeratedPath) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = std::uniform_int_distribution<std::int32_t>(1, 120)(rng);
        const auto pt = preprocess(RootedTree::build(n, testing::random_edges(n, rng)));
        const auto walk = testing::walker(pt.tree);
        std::uniform_int_distribution<std::int32_t> node(1, n);
        for (int i = 0; i < 20; ++i) {
            const auto from = node(rng);
            const auto q = node(rng);
            const auto path = walk.path(from, q);
            for (std::size_t z = 0; z < path.size(); ++z) {
                ASSERT_EQ(step_toward(pt.ancestry, NodeId{from}, NodeId{q}, static_cast<Length>(z)).value, path[z]);
            }
            ASSERT_THROW(step_toward(pt.ancestry, NodeId{from}, NodeId{q}, static_cast<Length>(path.size())), Error);
        }
    }
}

struct PhaseRun {
    QueryOutcome serving_move;
    std::vector<ServerMove> extra;
    std::vector<BudgetStep> trace;
    VirtualTree vt;
    PhaseAnnotation ann;
};

PhaseRun run_phases(const PreprocessedTree& pt, ServerConfiguration& config, NodeId q, EngineOptions options = {}) {
    PhaseRun run;
    const auto set = collect_virtual_nodes(pt.ancestry, pt.traversal, config.positions(), q);
    run.vt = build_virtual_tree(set, pt.traversal, pt.ancestry, q);
    run.ann = closest_computing(run.vt, config);
    const auto serving = run.ann.closest[run.vt.root];
    const auto reach = run.ann.dist_to_closest[run.vt.root];
    run.serving_move.serving_server = serving;
    run.serving_move.cost = reach;
    move_server(pt.ancestry, config, serving, q, reach);
    update_positions(run.vt, run.ann, config, run.vt.root, reach, pt.ancestry, q, run.extra, options, &run.trace);
    return run;
}

TEST(UpdatePositions, SingleServerMovesNothingElse) {
    const auto pt = testing::t7();
    ServerConfiguration config(7, nodes_of({6}));
    const auto run = run_phases(pt, config, NodeId{4});
    EXPECT_TRUE(run.extra.empty());
    EXPECT_EQ(config.position(sid(1)), NodeId{4});
}

TEST(UpdatePositions, T7SecondServerStopsAfterOneStep) {
    const auto pt = testing::t7();
    ServerConfiguration config(7, nodes_of({4, 7}));
    const auto run = run_phases(pt, config, NodeId{5});
    ASSERT_EQ(run.extra.size(), 1u);
    EXPECT_EQ(run.extra[0], (ServerMove{sid(2), NodeId{7}, NodeId{3}, 1}));
    EXPECT_EQ(config.position(sid(1)), NodeId{5});

    std::map<int, std::pair<Length, Length>> budgets;
    for (const auto& step : run.trace) budgets[run.vt.nodes[step.local].value] = {step.inherited, step.budget};
    EXPECT_EQ(budgets.at(5), (std::pair<Length, Length>{2, 2}));
    EXPECT_EQ(budgets.at(2), (std::pair<Length, Length>{2, 1}));
}

TEST(UpdatePositions, T7TieBlocksLargerId) {
    const auto pt = testing::t7();
    ServerConfiguration config(7, nodes_of({4, 5}));
    const auto run = run_phases(pt, config, NodeId{1});
    EXPECT_EQ(run.serving_move.serving_server, sid(1));
    EXPECT_EQ(run.serving_move.cost, 2);
    ASSERT_EQ(run.extra.size(), 1u);
    EXPECT_EQ(run.extra[0], (ServerMove{sid(2), NodeId{5}, NodeId{2}, 1}));
}

TEST(UpdatePositions, SkippingBudgetUpdateOvershoots) {
    const auto pt = testing::t7();
    ServerConfiguration config(7, nodes_of({4, 7}));
    run_phases(pt, config, NodeId{5}, EngineOptions{.skip_budget_update = true});
    EXPECT_EQ(config.position(sid(2)), NodeId{1});
}

TEST(ProcessQuery, Examples) {
    {
        const auto pt = testing::t7();
        ServerConfiguration config(7, nodes_of({3, 6, 6}));
        const auto out = process_query(pt, config, NodeId{6});
        EXPECT_EQ(out.serving_server, sid(2));
        EXPECT_EQ(out.cost, 0);
        EXPECT_TRUE(out.moves.empty());
    }
    {
        const auto pt = testing::p5();
        ServerConfiguration config(5, nodes_of({5}));
        const auto out = process_query(pt, config, NodeId{1});
        EXPECT_EQ(out.serving_server, sid(1));
        EXPECT_EQ(out.cost, 4);
        EXPECT_EQ(config.position(sid(1)), NodeId{1});
    }
    {
        const auto pt = testing::t7();
        ServerConfiguration config(7, nodes_of({4, 7}));
        const auto out = process_query(pt, config, NodeId{5});
        EXPECT_EQ(out.serving_server, sid(1));
        EXPECT_EQ(out.cost, 3);
        EXPECT_EQ(config.position(sid(1)), NodeId{5});
        EXPECT_EQ(config.position(sid(2)), NodeId{3});
        EXPECT_EQ(out.moves, (std::vector<ServerMove>{{sid(1), NodeId{4}, NodeId{5}, 2}, {sid(2), NodeId{7}, NodeId{3}, 1}}));
    }
    {
        const auto pt = testing::t7();
        ServerConfiguration config(7, nodes_of({4}));
        EXPECT_THROW(process_query(pt, config, NodeId{8}), Error);
    }
}

// Serving rule, monotone approach, displacement cap, budget monotonicity and
// occupancy idempotence over random query sequences.
TEST(EngineProperty, StructuralInvariants) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 1500; ++trial) {
        const auto n = std::uniform_int_distribution<std::int32_t>(1, 150)(rng);
        const auto k = std::uniform_int_distribution<std::int32_t>(1, 8)(rng);
        const auto pt = preprocess(RootedTree::build(n, testing::random_edges(n, rng)));
        const auto walk = testing::walker(pt.tree);
        std::uniform_int_distribution<std::int32_t> node(1, n);
        std::vector<NodeId> start;
        for (std::int32_t i = 0; i < k; ++i) start.emplace_back(node(rng));
        ServerConfiguration config(n, start);

        for (int step = 0; step < 10; ++step) {
            const NodeId q{node(rng)};
            const std::vector<NodeId> before(config.positions().begin(), config.positions().end());

            std::pair<Length, std::int32_t> best{std::numeric_limits<Length>::max(), 0};
            for (std::int32_t i = 0; i < k; ++i) best = std::min(best, {walk.dist(before[i].value, q.value), i + 1});

            const auto run = run_phases(pt, config, q);
            ASSERT_EQ(run.serving_move.serving_server, sid(best.second));
            ASSERT_EQ(run.serving_move.cost, best.first);

            for (std::int32_t i = 0; i < k; ++i) {
                const auto old_pos = before[i].value;
                const auto new_pos = config.position(sid(i + 1)).value;
                ASSERT_LE(walk.dist(new_pos, q.value), walk.dist(old_pos, q.value));
                ASSERT_EQ(walk.dist(old_pos, new_pos) + walk.dist(new_pos, q.value), walk.dist(old_pos, q.value));
                ASSERT_LE(walk.dist(old_pos, new_pos), best.first);
            }

            std::vector<Length> budget_at(run.vt.size(), -1);
            for (const auto& s : run.trace) {
                ASSERT_LE(s.budget, s.inherited);
                budget_at[s.local] = s.budget;
            }
            for (const auto& s : run.trace) {
                const auto p = run.vt.parent[s.local];
                if (p < 0) ASSERT_EQ(s.inherited, best.first);
                else ASSERT_EQ(s.inherited, budget_at[p]);
            }
            std::vector<std::int32_t> moved;
            for (const auto& m : run.extra) moved.push_back(m.server.value);
            std::sort(moved.begin(), moved.end());
            ASSERT_TRUE(std::adjacent_find(moved.begin(), moved.end()) == moved.end()) << "server moved twice";
            ASSERT_TRUE(config.occupancy_consistent());
        }
    }
}

// The same tree with reversed edge lists has different child orders and DFS
// stamps; outcomes must not change.
TEST(EngineProperty, IndependentOfChildOrder) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        const auto n = std::uniform_int_distribution<std::int32_t>(1, 80)(rng);
        const auto k = std::uniform_int_distribution<std::int32_t>(1, 6)(rng);
        auto edges = testing::random_edges(n, rng);
        const auto a = preprocess(RootedTree::build(n, edges));
        std::reverse(edges.begin(), edges.end());
        const auto b = preprocess(RootedTree::build(n, edges));

        std::uniform_int_distribution<std::int32_t> node(1, n);
        std::vector<NodeId> start;
        for (std::int32_t i = 0; i < k; ++i) start.emplace_back(node(rng));
        Engine ea(a, ServerConfiguration(n, start));
        Engine eb(b, ServerConfiguration(n, start));
        for (int step = 0; step < 20; ++step) {
            const NodeId q{node(rng)};
            ASSERT_EQ(ea.process(q), eb.process(q));
        }
    }
}

TEST(EngineProperty, AgreesWithNaiveSimulator) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto n = std::uniform_int_distribution<std::int32_t>(1, 200)(rng);
        const auto k = std::uniform_int_distribution<std::int32_t>(1, 8)(rng);
        const auto pt = preprocess(RootedTree::build(n, testing::random_edges(n, rng)));
        std::uniform_int_distribution<std::int32_t> node(1, n);
        std::vector<NodeId> start;
        for (std::int32_t i = 0; i < k; ++i) start.emplace_back(node(rng));
        Engine fast(pt, ServerConfiguration(n, start));
        ServerConfiguration naive(n, start);
        for (int step = 0; step < 30; ++step) {
            const NodeId q{node(rng)};
            ASSERT_EQ(fast.process(q), naive_query(pt, naive, q).outcome) << "trial " << trial << " step " << step;
            const auto pf = fast.configuration().positions();
            const auto pn = naive.positions();
            ASSERT_TRUE(std::equal(pf.begin(), pf.end(), pn.begin(), pn.end()));
        }
    }
}

}  // namespace
}  // namespace kserver
