// kserver: generate, solve, verify and benchmark online k-server instances.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kserver/harness.hpp"

namespace {

using namespace kserver;

std::vector<std::int32_t> parse_list(const std::string& csv) {
    std::vector<std::int32_t> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stoi(item));
    }
    return out;
}

TreeShape require_shape(const std::string& name) {
    if (auto shape = parse_shape(name)) return *shape;
    throw Error(ErrorCode::BadParams, "unknown shape '" + name + "'");
}

void write_output(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::BadParams, "cannot write " + path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online k-server on trees: O(k log k) query processing"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a random instance");
    std::int32_t gen_n = 0, gen_k = 0, gen_m = 0;
    std::uint64_t gen_seed = 1;
    std::string gen_shape = "random", gen_out;
    gen->add_option("--nodes", gen_n, "Tree size")->required();
    gen->add_option("--servers", gen_k, "Number of servers")->required();
    gen->add_option("--queries", gen_m, "Number of requests")->required();
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--shape", gen_shape, "random|path|star|caterpillar|binary");
    gen->add_option("-o,--output", gen_out, "Output file (default stdout)");

    // solve
    auto* solve = app.add_subcommand("solve", "Serve every request of an instance");
    std::string solve_in, solve_engine = "fast";
    solve->add_option("-i,--input", solve_in, "Instance file")->required();
    solve->add_option("--engine", solve_engine, "fast|naive");

    // verify
    auto* verify = app.add_subcommand("verify", "Differential test: fast engine vs naive simulator");
    VerifyParams vp;
    std::string verify_in;
    verify->add_option("--trials", vp.trials, "Number of random instances");
    verify->add_option("--max-nodes", vp.max_nodes, "Upper bound on n");
    verify->add_option("--max-servers", vp.max_servers, "Upper bound on k");
    verify->add_option("--max-queries", vp.max_queries, "Upper bound on m");
    verify->add_option("--seed", vp.seed, "RNG seed");
    verify->add_flag("--with-opt", vp.with_opt, "Report competitive ratio against the offline optimum");
    verify->add_option("--repro-dir", vp.repro_dir, "Where failing instances are written");
    verify->add_option("-i,--input", verify_in, "Verify a single instance file instead");

    // bench
    auto* bench = app.add_subcommand("bench", "Preprocessing and query timing sweep");
    std::string bench_nodes, bench_servers, bench_shape = "random", bench_out, bench_engines = "fast";
    BenchParams bp;
    bench->add_option("--nodes", bench_nodes, "Comma-separated tree sizes")->required();
    bench->add_option("--servers", bench_servers, "Comma-separated server counts")->required();
    bench->add_option("--shape", bench_shape, "random|path|star|caterpillar|binary");
    bench->add_option("--seed", bp.seed, "RNG seed");
    bench->add_option("--queries", bp.queries, "Timed requests per configuration");
    bench->add_option("--engines", bench_engines, "Comma-separated: fast,naive");
    bench->add_option("-o,--output", bench_out, "CSV file (default stdout)");

    // vtree
    auto* vtree = app.add_subcommand("vtree", "Dump the virtual tree of one request as an edge list");
    std::string vtree_in;
    std::int32_t vtree_request = 1;
    vtree->add_option("-i,--input", vtree_in, "Instance file")->required();
    vtree->add_option("--request", vtree_request, "1-based request index, served from the initial positions");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            const auto inst = generate_instance(gen_n, gen_k, gen_m, gen_seed, require_shape(gen_shape));
            write_output(serialize_instance(inst), gen_out);
        } else if (solve->parsed()) {
            const auto engine = parse_engine(solve_engine);
            if (!engine) throw Error(ErrorCode::BadParams, "unknown engine '" + solve_engine + "'");
            std::cout << format_solve_report(run_solve(load_instance(solve_in), *engine));
        } else if (verify->parsed()) {
            const auto verdict = verify_in.empty() ? run_verify(vp) : run_verify(load_instance(verify_in), vp);
            std::cout << "PASS trials=" << verdict.trials << " queries=" << verdict.queries;
            if (vp.with_opt) {
                std::cout << " opt_trials=" << verdict.opt_trials << " max_ratio=";
                if (verdict.max_ratio) std::cout << *verdict.max_ratio; else std::cout << "n/a";
            }
            std::cout << '\n';
        } else if (bench->parsed()) {
            bp.nodes = parse_list(bench_nodes);
            bp.servers = parse_list(bench_servers);
            bp.shape = require_shape(bench_shape);
            bp.engines.clear();
            std::stringstream ss(bench_engines);
            for (std::string name; std::getline(ss, name, ',');) {
                const auto engine = parse_engine(name);
                if (!engine) throw Error(ErrorCode::BadParams, "unknown engine '" + name + "'");
                bp.engines.push_back(*engine);
            }
            write_output(bench_csv(run_bench(bp)), bench_out);
        } else if (vtree->parsed()) {
            const auto inst = load_instance(vtree_in);
            if (vtree_request < 1 || vtree_request > inst.m) throw Error(ErrorCode::BadParams, "no such request");
            const auto pt = preprocess(RootedTree::build(inst.n, inst.edges));
            const NodeId q = inst.requests[vtree_request - 1];
            const auto set = collect_virtual_nodes(pt.ancestry, pt.traversal, inst.initial_servers, q);
            std::cout << dump_virtual_tree(build_virtual_tree(set, pt.traversal, pt.ancestry, q));
        }
    } catch (const MismatchError& e) {
        std::cerr << "FAIL " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
