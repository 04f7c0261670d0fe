#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kserver/harness.hpp"

namespace py = pybind11;
using namespace kserver;

namespace {

std::vector<NodeId> to_nodes(const std::vector<std::int32_t>& raw) {
    std::vector<NodeId> out;
    out.reserve(raw.size());
    for (auto v : raw) out.emplace_back(v);
    return out;
}

std::vector<std::int32_t> to_ints(std::span<const NodeId> nodes) {
    std::vector<std::int32_t> out;
    out.reserve(nodes.size());
    for (auto v : nodes) out.push_back(v.value);
    return out;
}

std::vector<Edge> to_edges(const std::vector<std::pair<std::int32_t, std::int32_t>>& raw) {
    std::vector<Edge> out;
    out.reserve(raw.size());
    for (auto [u, v] : raw) out.emplace_back(NodeId{u}, NodeId{v});
    return out;
}

PreprocessedTree make_tree(std::int32_t n, const std::vector<std::pair<std::int32_t, std::int32_t>>& edges) {
    return preprocess(RootedTree::build(n, to_edges(edges)));
}

py::list moves_of(const QueryOutcome& o) {
    py::list out;
    for (const auto& m : o.moves) out.append(py::make_tuple(m.server.value, m.from.value, m.to.value, m.distance));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "C++ core of the kserver package";

    py::register_exception<Error>(m, "KServerError", PyExc_ValueError);

    py::class_<PreprocessedTree>(m, "Tree")
        .def(py::init(&make_tree), py::arg("n"), py::arg("edges"),
             "Root an undirected edge list at node 1 and build all query structures.")
        .def_property_readonly("size", &PreprocessedTree::size)
        .def("parent", [](const PreprocessedTree& t, std::int32_t v) {
            t.tree.check(NodeId{v});
            return t.tree.parent(NodeId{v}).value;
        })
        .def("children", [](const PreprocessedTree& t, std::int32_t v) {
            t.tree.check(NodeId{v});
            return to_ints(t.tree.children(NodeId{v}));
        })
        .def("depth", [](const PreprocessedTree& t, std::int32_t v) {
            t.ancestry.check(NodeId{v});
            return t.ancestry.depth(NodeId{v});
        })
        .def("t_in", [](const PreprocessedTree& t, std::int32_t v) {
            t.ancestry.check(NodeId{v});
            return t.traversal.t_in[v];
        })
        .def("t_out", [](const PreprocessedTree& t, std::int32_t v) {
            t.ancestry.check(NodeId{v});
            return t.traversal.t_out[v];
        })
        .def("lca", [](const PreprocessedTree& t, std::int32_t u, std::int32_t v) {
            return t.ancestry.lca(NodeId{u}, NodeId{v}).value;
        })
        .def("la", [](const PreprocessedTree& t, std::int32_t v, std::int32_t d) {
            return t.ancestry.la(NodeId{v}, d).value;
        })
        .def("dist", [](const PreprocessedTree& t, std::int32_t u, std::int32_t v) {
            return t.ancestry.dist(NodeId{u}, NodeId{v});
        })
        .def("is_ancestor", [](const PreprocessedTree& t, std::int32_t u, std::int32_t v) {
            return is_ancestor(t.traversal, NodeId{u}, NodeId{v});
        })
        .def("diameter", &tree_diameter);

    py::class_<QueryOutcome>(m, "QueryOutcome")
        .def_property_readonly("serving_server", [](const QueryOutcome& o) { return o.serving_server.value; })
        .def_readonly("cost", &QueryOutcome::cost)
        .def_property_readonly("moves", &moves_of, "List of (server, from, to, distance).")
        .def("__eq__", [](const QueryOutcome& a, const QueryOutcome& b) { return a == b; })
        .def("__repr__", [](const QueryOutcome& o) {
            return "QueryOutcome(serving_server=" + std::to_string(o.serving_server.value) +
                   ", cost=" + std::to_string(o.cost) + ")";
        });

    py::class_<Engine>(m, "Engine")
        .def(py::init([](const PreprocessedTree& t, const std::vector<std::int32_t>& positions) {
                 return Engine(t, ServerConfiguration(t.size(), to_nodes(positions)));
             }),
             py::arg("tree"), py::arg("positions"), py::keep_alive<1, 2>())
        .def("process", [](Engine& e, std::int32_t q) { return e.process(NodeId{q}); }, py::arg("q"))
        .def_property_readonly("positions",
                               [](const Engine& e) { return to_ints(e.configuration().positions()); });

    m.def(
        "naive_query",
        [](const PreprocessedTree& t, const std::vector<std::int32_t>& positions, std::int32_t q) {
            ServerConfiguration config(t.size(), to_nodes(positions));
            auto result = naive_query(t, config, NodeId{q});
            py::list phases;
            for (const auto& phase : result.trace.phases) {
                py::list ids;
                for (auto s : phase.active) ids.append(s.value);
                phases.append(ids);
            }
            return py::make_tuple(result.outcome, to_ints(config.positions()), phases);
        },
        py::arg("tree"), py::arg("positions"), py::arg("q"),
        "Phase-by-phase reference simulation. Returns (outcome, new positions, active ids per phase).");

    m.def(
        "offline_optimum",
        [](const PreprocessedTree& t, const std::vector<std::int32_t>& initial,
           const std::vector<std::int32_t>& requests) {
            const auto sol = offline_optimum(t, to_nodes(initial), to_nodes(requests));
            std::vector<std::int32_t> schedule;
            for (auto s : sol.schedule) schedule.push_back(s.value);
            return py::make_tuple(sol.opt_cost, schedule);
        },
        py::arg("tree"), py::arg("initial"), py::arg("requests"));

    m.def(
        "virtual_tree",
        [](const PreprocessedTree& t, const std::vector<std::int32_t>& servers, std::int32_t q) {
            const auto set = collect_virtual_nodes(t.ancestry, t.traversal, to_nodes(servers), NodeId{q});
            const auto vt = build_virtual_tree(set, t.traversal, t.ancestry, NodeId{q});
            py::list edges;
            for (const auto& e : vt.edges) edges.append(py::make_tuple(e.upper.value, e.lower.value, e.weight));
            py::dict out;
            out["v_s"] = to_ints(set.v_s);
            out["v_olca"] = to_ints(set.v_olca);
            out["nodes"] = to_ints(vt.nodes);
            out["edges"] = edges;
            out["root"] = vt.root_node().value;
            return out;
        },
        py::arg("tree"), py::arg("servers"), py::arg("q"));

    py::class_<Instance>(m, "Instance")
        .def_readonly("n", &Instance::n)
        .def_readonly("k", &Instance::k)
        .def_readonly("m", &Instance::m)
        .def_property_readonly("edges",
                               [](const Instance& i) {
                                   std::vector<std::pair<std::int32_t, std::int32_t>> out;
                                   for (auto [u, v] : i.edges) out.emplace_back(u.value, v.value);
                                   return out;
                               })
        .def_property_readonly("initial_servers", [](const Instance& i) { return to_ints(i.initial_servers); })
        .def_property_readonly("requests", [](const Instance& i) { return to_ints(i.requests); })
        .def("__eq__", [](const Instance& a, const Instance& b) { return a == b; });

    m.def("parse_instance", [](const std::string& text) { return parse_instance(text); }, py::arg("text"));
    m.def("serialize_instance", &serialize_instance, py::arg("instance"));
    m.def(
        "generate_instance",
        [](std::int32_t n, std::int32_t k, std::int32_t queries, std::uint64_t seed, const std::string& shape) {
            const auto parsed = parse_shape(shape);
            if (!parsed) throw Error(ErrorCode::BadParams, "unknown shape '" + shape + "'");
            return generate_instance(n, k, queries, seed, *parsed);
        },
        py::arg("n"), py::arg("k"), py::arg("m"), py::arg("seed") = 1, py::arg("shape") = "random");

    m.def(
        "solve",
        [](const Instance& inst, const std::string& engine) {
            const auto kind = parse_engine(engine);
            if (!kind) throw Error(ErrorCode::BadParams, "unknown engine '" + engine + "'");
            const auto report = run_solve(inst, *kind);
            std::vector<std::pair<std::int32_t, Length>> per_query;
            for (const auto& q : report.queries) per_query.emplace_back(q.serving.value, q.cost);
            return py::make_tuple(per_query, report.total_cost, to_ints(report.final_positions));
        },
        py::arg("instance"), py::arg("engine") = "fast",
        "Returns ([(serving_id, cost), ...], total_cost, final_positions).");

    m.def(
        "verify",
        [](std::int64_t trials, std::int32_t max_nodes, std::int32_t max_servers, std::int32_t max_queries,
           std::uint64_t seed, bool with_opt) {
            VerifyParams params;
            params.trials = trials;
            params.max_nodes = max_nodes;
            params.max_servers = max_servers;
            params.max_queries = max_queries;
            params.seed = seed;
            params.with_opt = with_opt;
            const auto verdict = run_verify(params);
            py::dict out;
            out["trials"] = verdict.trials;
            out["queries"] = verdict.queries;
            out["opt_trials"] = verdict.opt_trials;
            out["max_ratio"] = verdict.max_ratio ? py::cast(*verdict.max_ratio) : py::none();
            return out;
        },
        py::arg("trials") = 100, py::arg("max_nodes") = 200, py::arg("max_servers") = 8,
        py::arg("max_queries") = 50, py::arg("seed") = 1, py::arg("with_opt") = false);
}
