#include "kserver/oracles.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <map>
#include <string>

namespace kserver {

NaiveResult naive_query(const PreprocessedTree& pt, ServerConfiguration& config, NodeId q) {
    const auto& index = pt.ancestry;
    index.check(q);
    const auto k = config.server_count();
    const std::vector<NodeId> start(config.positions().begin(), config.positions().end());

    NaiveResult result;
    const std::int64_t phase_limit = static_cast<std::int64_t>(pt.size()) * k;
    std::vector<ServerId> active;
    while (!config.min_occupant(q)) {
        if (static_cast<std::int64_t>(result.trace.phases.size()) >= phase_limit) {
            throw Error(ErrorCode::NonTermination, "no server reached node " + std::to_string(q.value) +
                                                       " after " + std::to_string(phase_limit) + " phases");
        }
        active.clear();
        for (std::int32_t i = 1; i <= k; ++i) {
            const NodeId a = config.position(ServerId{i});
            const Length to_q = index.dist_unchecked(a, q);
            bool blocked = false;
            for (std::int32_t j = 1; j <= k && !blocked; ++j) {
                if (j == i) continue;
                const NodeId b = config.position(ServerId{j});
                if (b == a) {
                    blocked = j < i;
                } else {
                    blocked = index.dist_unchecked(a, b) + index.dist_unchecked(b, q) == to_q;
                }
            }
            if (!blocked) active.push_back(ServerId{i});
        }
        if (active.empty()) throw Error(ErrorCode::InternalInvariantViolation, "phase without active servers");
        for (const ServerId s : active) move_server(index, config, s, q, 1);
        result.trace.total_cost += static_cast<Length>(active.size());
        result.trace.phases.push_back({active});
    }

    auto& outcome = result.outcome;
    outcome.serving_server = *config.min_occupant(q);
    for (std::int32_t i = 1; i <= k; ++i) {
        const NodeId to = config.position(ServerId{i});
        if (to == start[i - 1]) continue;
        const Length d = index.dist_unchecked(start[i - 1], to);
        outcome.moves.push_back({ServerId{i}, start[i - 1], to, d});
        outcome.cost += d;
    }
    return result;
}

namespace {

constexpr std::int32_t kMaxOptServers = 4;
using Placement = std::array<std::int32_t, kMaxOptServers>;

void check_nodes(const PreprocessedTree& pt, std::span<const NodeId> initial, std::span<const NodeId> requests) {
    if (initial.empty()) throw Error(ErrorCode::BadParams, "at least one server is required");
    for (NodeId v : initial) pt.ancestry.check(v);
    for (NodeId v : requests) pt.ancestry.check(v);
}

}  // namespace

OfflineSolution offline_optimum(const PreprocessedTree& pt, std::span<const NodeId> initial,
                                std::span<const NodeId> requests) {
    const auto k = static_cast<std::int32_t>(initial.size());
    if (k > kMaxOptServers || requests.size() > 8 || pt.size() > 64) {
        throw Error(ErrorCode::InstanceTooLarge, "offline optimum limited to k <= 4, 8 requests, n <= 64");
    }
    check_nodes(pt, initial, requests);

    struct State {
        Length cost;
        Placement previous;
        std::int32_t server;
    };
    std::vector<std::map<Placement, State>> layers(requests.size() + 1);
    Placement start{};
    for (std::int32_t i = 0; i < k; ++i) start[i] = initial[i].value;
    layers[0].emplace(start, State{0, start, 0});

    for (std::size_t t = 0; t < requests.size(); ++t) {
        const NodeId q = requests[t];
        for (const auto& [placement, state] : layers[t]) {
            for (std::int32_t i = 0; i < k; ++i) {
                Placement next = placement;
                next[i] = q.value;
                const Length cost = state.cost + pt.ancestry.dist_unchecked(NodeId{placement[i]}, q);
                auto [it, fresh] = layers[t + 1].try_emplace(next, State{cost, placement, i + 1});
                if (!fresh && cost < it->second.cost) it->second = State{cost, placement, i + 1};
            }
        }
    }

    const auto& last = layers.back();
    auto best = std::min_element(last.begin(), last.end(),
                                 [](const auto& a, const auto& b) { return a.second.cost < b.second.cost; });
    OfflineSolution solution;
    solution.opt_cost = best->second.cost;
    solution.schedule.resize(requests.size());
    Placement cursor = best->first;
    for (std::size_t t = requests.size(); t > 0; --t) {
        const auto& state = layers[t].at(cursor);
        solution.schedule[t - 1] = ServerId{state.server};
        cursor = state.previous;
    }
    return solution;
}

Length exhaustive_optimum(const PreprocessedTree& pt, std::span<const NodeId> initial,
                          std::span<const NodeId> requests) {
    check_nodes(pt, initial, requests);
    const auto n = pt.size();
    const auto k = static_cast<std::int32_t>(initial.size());
    std::int64_t count = 1;
    for (std::int32_t i = 0; i < k; ++i) {
        count *= n;
        if (count > 4096) throw Error(ErrorCode::InstanceTooLarge, "n^k exceeds 4096 configurations");
    }

    // Configuration c encodes server i at node (c / n^i) % n + 1.
    const auto node_of = [&](std::int64_t c, std::int32_t i) {
        for (std::int32_t j = 0; j < i; ++j) c /= n;
        return NodeId{static_cast<std::int32_t>(c % n) + 1};
    };
    std::int64_t start = 0;
    for (std::int32_t i = k - 1; i >= 0; --i) start = start * n + (initial[i].value - 1);

    constexpr Length kInf = std::numeric_limits<Length>::max();
    std::vector<Length> cost(count, kInf);
    cost[start] = 0;
    for (const NodeId q : requests) {
        std::vector<Length> next(count, kInf);
        for (std::int64_t to = 0; to < count; ++to) {
            bool covers = false;
            for (std::int32_t i = 0; i < k; ++i) covers = covers || node_of(to, i) == q;
            if (!covers) continue;
            for (std::int64_t from = 0; from < count; ++from) {
                if (cost[from] == kInf) continue;
                Length step = 0;
                for (std::int32_t i = 0; i < k; ++i) {
                    step += pt.ancestry.dist_unchecked(node_of(from, i), node_of(to, i));
                }
                next[to] = std::min(next[to], cost[from] + step);
            }
        }
        cost = std::move(next);
    }
    return *std::min_element(cost.begin(), cost.end());
}

CompetitiveRecord competitive_report(Length alg_cost, Length opt_cost, std::int32_t k, Length diameter) {
    CompetitiveRecord record{alg_cost, opt_cost, k, diameter, std::nullopt,
                             static_cast<Length>(k) * opt_cost + static_cast<Length>(k) * k * diameter};
    if (opt_cost > 0) record.ratio = static_cast<double>(alg_cost) / static_cast<double>(opt_cost);
    if (alg_cost > record.bound) {
        throw Error(ErrorCode::SanityBoundViolated, "online cost " + std::to_string(alg_cost) +
                                                        " exceeds k*opt + k^2*diameter = " +
                                                        std::to_string(record.bound));
    }
    return record;
}

}  // namespace kserver
