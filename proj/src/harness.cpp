#include "kserver/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#ifdef __GLIBC__
#include <malloc.h>
#endif

namespace kserver {

std::optional<TreeShape> parse_shape(std::string_view name) {
    if (name == "random") return TreeShape::Random;
    if (name == "path") return TreeShape::Path;
    if (name == "star") return TreeShape::Star;
    if (name == "caterpillar") return TreeShape::Caterpillar;
    if (name == "binary") return TreeShape::Binary;
    return std::nullopt;
}

std::string_view to_string(TreeShape shape) {
    switch (shape) {
        case TreeShape::Random: return "random";
        case TreeShape::Path: return "path";
        case TreeShape::Star: return "star";
        case TreeShape::Caterpillar: return "caterpillar";
        case TreeShape::Binary: return "binary";
    }
    return "unknown";
}

std::optional<EngineKind> parse_engine(std::string_view name) {
    if (name == "fast") return EngineKind::Fast;
    if (name == "naive") return EngineKind::Naive;
    return std::nullopt;
}

std::string_view to_string(EngineKind engine) { return engine == EngineKind::Fast ? "fast" : "naive"; }

// ---------------------------------------------------------------------------
// Instance text format

namespace {

struct Token {
    std::string_view text;
    std::size_t column;  // 1-based
};

struct Line {
    std::size_t number;  // 1-based
    std::string_view text;
    std::vector<Token> tokens;
};

std::vector<Line> content_lines(std::string_view text) {
    std::vector<Line> lines;
    std::size_t number = 0;
    while (!text.empty()) {
        ++number;
        const auto eol = text.find('\n');
        auto raw = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

        Line line{number, raw, {}};
        for (std::size_t i = 0; i < raw.size();) {
            if (raw[i] == ' ' || raw[i] == '\t') {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < raw.size() && raw[j] != ' ' && raw[j] != '\t') ++j;
            line.tokens.push_back({raw.substr(i, j - i), i + 1});
            i = j;
        }
        if (line.tokens.empty() || line.tokens.front().text.front() == '#') continue;
        lines.push_back(std::move(line));
    }
    return lines;
}

[[noreturn]] void fail(ErrorCode code, std::size_t line, std::size_t column, const std::string& what) {
    throw Error(code, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
}

std::int32_t parse_int(const Line& line, const Token& token) {
    std::int32_t value = 0;
    const auto* first = token.text.data();
    const auto* last = first + token.text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        fail(ErrorCode::ParseError, line.number, token.column, "expected an integer, got '" + std::string(token.text) + "'");
    }
    return value;
}

NodeId parse_node(const Line& line, const Token& token, std::int32_t n) {
    const auto v = parse_int(line, token);
    if (v < 1 || v > n) {
        fail(ErrorCode::NodeOutOfRange, line.number, token.column,
             "node " + std::to_string(v) + " not in [1, " + std::to_string(n) + "]");
    }
    return NodeId{v};
}

std::vector<NodeId> parse_node_list(const Line& line, std::int32_t expected, std::int32_t n, const char* what) {
    if (static_cast<std::int32_t>(line.tokens.size()) != expected) {
        fail(ErrorCode::CountMismatch, line.number, 1,
             "expected " + std::to_string(expected) + " " + what + ", found " + std::to_string(line.tokens.size()));
    }
    std::vector<NodeId> out;
    out.reserve(expected);
    for (const auto& token : line.tokens) out.push_back(parse_node(line, token, n));
    return out;
}

}  // namespace

Instance parse_instance(std::string_view text) {
    const auto lines = content_lines(text);
    if (lines.empty()) throw Error(ErrorCode::ParseError, "empty instance");

    const auto& header = lines.front();
    if (header.tokens.size() != 3) {
        fail(ErrorCode::ParseError, header.number, 1, "header must be 'n k m'");
    }
    Instance inst;
    inst.n = parse_int(header, header.tokens[0]);
    inst.k = parse_int(header, header.tokens[1]);
    inst.m = parse_int(header, header.tokens[2]);
    for (std::size_t i = 0; i < 3; ++i) {
        const std::int32_t value = i == 0 ? inst.n : i == 1 ? inst.k : inst.m;
        if (value < 1) fail(ErrorCode::ParseError, header.number, header.tokens[i].column, "counts must be >= 1");
    }

    const auto edge_lines = static_cast<std::int64_t>(lines.size()) - 3;
    if (edge_lines != inst.n - 1) {
        throw Error(ErrorCode::CountMismatch, "header declares n=" + std::to_string(inst.n) + " (" +
                                                  std::to_string(inst.n - 1) + " edge lines) but found " +
                                                  std::to_string(std::max<std::int64_t>(edge_lines, 0)) +
                                                  " edge lines plus server and request lines");
    }

    inst.edges.reserve(inst.n - 1);
    for (std::int32_t i = 1; i < inst.n; ++i) {
        const auto& line = lines[i];
        if (line.tokens.size() != 2) fail(ErrorCode::ParseError, line.number, 1, "edge line must be 'u v'");
        inst.edges.emplace_back(parse_node(line, line.tokens[0], inst.n), parse_node(line, line.tokens[1], inst.n));
    }
    inst.initial_servers = parse_node_list(lines[inst.n], inst.k, inst.n, "server nodes");
    inst.requests = parse_node_list(lines[inst.n + 1], inst.m, inst.n, "request nodes");

    // Validates connectivity and acyclicity.
    (void)RootedTree::build(inst.n, inst.edges);
    return inst;
}

std::string serialize_instance(const Instance& inst) {
    std::ostringstream os;
    os << inst.n << ' ' << inst.k << ' ' << inst.m << '\n';
    for (const auto& [u, v] : inst.edges) os << u << ' ' << v << '\n';
    const auto write_list = [&](const std::vector<NodeId>& list) {
        for (std::size_t i = 0; i < list.size(); ++i) os << (i ? " " : "") << list[i];
        os << '\n';
    };
    write_list(inst.initial_servers);
    write_list(inst.requests);
    return os.str();
}

Instance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_instance(buffer.str());
}

void save_instance(const Instance& instance, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::BadParams, "cannot write " + path.string());
    out << serialize_instance(instance);
}

// ---------------------------------------------------------------------------
// Generation

namespace {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [lo, hi]; rejection sampling keeps it exact and portable.
    std::int32_t uniform(std::int32_t lo, std::int32_t hi) {
        const auto range = static_cast<std::uint64_t>(hi - lo) + 1;
        const auto limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return lo + static_cast<std::int32_t>(x % range);
    }

private:
    std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 finaliser
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

Instance generate_instance(std::int32_t n, std::int32_t k, std::int32_t m, std::uint64_t seed, TreeShape shape) {
    if (n < 1 || k < 1 || m < 1) {
        throw Error(ErrorCode::BadParams, "need n >= 1, k >= 1, m >= 1 (got " + std::to_string(n) + ", " +
                                              std::to_string(k) + ", " + std::to_string(m) + ")");
    }
    Rng rng(seed);
    Instance inst;
    inst.n = n;
    inst.k = k;
    inst.m = m;
    inst.edges.reserve(n - 1);

    const std::int32_t spine = std::max(1, (n + 1) / 2);
    for (std::int32_t i = 2; i <= n; ++i) {
        std::int32_t parent = 1;
        switch (shape) {
            case TreeShape::Random: parent = rng.uniform(1, i - 1); break;
            case TreeShape::Path: parent = i - 1; break;
            case TreeShape::Star: parent = 1; break;
            case TreeShape::Caterpillar: parent = i <= spine ? i - 1 : rng.uniform(1, spine); break;
            case TreeShape::Binary: parent = i / 2; break;
        }
        inst.edges.emplace_back(NodeId{parent}, NodeId{i});
    }
    inst.initial_servers.reserve(k);
    for (std::int32_t i = 0; i < k; ++i) inst.initial_servers.emplace_back(rng.uniform(1, n));
    inst.requests.reserve(m);
    for (std::int32_t i = 0; i < m; ++i) inst.requests.emplace_back(rng.uniform(1, n));
    return inst;
}

// ---------------------------------------------------------------------------
// Solving

namespace {

PreprocessedTree preprocess_instance(const Instance& inst) {
    return preprocess(RootedTree::build(inst.n, inst.edges));
}

}  // namespace

SolveReport run_solve(const Instance& instance, EngineKind engine, const EngineOptions& options) {
    const auto pt = preprocess_instance(instance);
    SolveReport report;
    report.queries.reserve(instance.requests.size());

    const auto record = [&](const QueryOutcome& outcome) {
        report.queries.push_back({outcome.serving_server, outcome.cost});
        report.total_cost += outcome.cost;
    };
    if (engine == EngineKind::Fast) {
        Engine fast(pt, ServerConfiguration(pt.size(), instance.initial_servers), options);
        for (const NodeId q : instance.requests) record(fast.process(q));
        const auto pos = fast.configuration().positions();
        report.final_positions.assign(pos.begin(), pos.end());
    } else {
        ServerConfiguration config(pt.size(), instance.initial_servers);
        for (const NodeId q : instance.requests) record(naive_query(pt, config, q).outcome);
        const auto pos = config.positions();
        report.final_positions.assign(pos.begin(), pos.end());
    }
    return report;
}

std::string format_solve_report(const SolveReport& report) {
    std::ostringstream os;
    for (const auto& q : report.queries) os << q.serving.value << ' ' << q.cost << '\n';
    os << "TOTAL " << report.total_cost << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Differential verification

namespace {

std::string describe(const QueryOutcome& o) {
    std::ostringstream os;
    os << "serving " << o.serving_server.value << ", cost " << o.cost << ", moves [";
    for (std::size_t i = 0; i < o.moves.size(); ++i) {
        const auto& m = o.moves[i];
        os << (i ? " " : "") << m.server.value << ':' << m.from << "->" << m.to;
    }
    return os.str() + "]";
}

}  // namespace

std::optional<std::string> compare_engines(const Instance& instance, const EngineOptions& fast_options) {
    const auto pt = preprocess_instance(instance);
    Engine fast(pt, ServerConfiguration(pt.size(), instance.initial_servers), fast_options);
    ServerConfiguration naive(pt.size(), instance.initial_servers);

    for (std::size_t t = 0; t < instance.requests.size(); ++t) {
        const NodeId q = instance.requests[t];
        const auto a = fast.process(q);
        const auto b = naive_query(pt, naive, q).outcome;
        const auto pa = fast.configuration().positions();
        const auto pb = naive.positions();
        if (a != b || !std::equal(pa.begin(), pa.end(), pb.begin(), pb.end())) {
            return "request " + std::to_string(t + 1) + " (node " + std::to_string(q.value) + "): fast {" +
                   describe(a) + "} vs naive {" + describe(b) + "}";
        }
    }
    return std::nullopt;
}

namespace {

void verify_one(const Instance& instance, const VerifyParams& params, VerifyVerdict& verdict,
                const std::filesystem::path& repro) {
    if (auto mismatch = compare_engines(instance, params.fast_options)) {
        std::filesystem::create_directories(repro.parent_path().empty() ? "." : repro.parent_path());
        save_instance(instance, repro);
        throw MismatchError(*mismatch, repro);
    }
    ++verdict.trials;
    verdict.queries += instance.m;

    if (params.with_opt && instance.n <= 64 && instance.k <= 4) {
        Instance prefix = instance;
        prefix.m = std::min(instance.m, 8);
        prefix.requests.resize(prefix.m);
        const auto pt = preprocess_instance(prefix);
        const auto alg = run_solve(prefix, EngineKind::Fast, params.fast_options).total_cost;
        const auto opt = offline_optimum(pt, prefix.initial_servers, prefix.requests).opt_cost;
        const auto record = competitive_report(alg, opt, prefix.k, tree_diameter(pt));
        ++verdict.opt_trials;
        if (record.ratio && (!verdict.max_ratio || *record.ratio > *verdict.max_ratio)) verdict.max_ratio = record.ratio;
    }
}

}  // namespace

VerifyVerdict run_verify(const VerifyParams& params) {
    if (params.trials < 0 || params.max_nodes < 1 || params.max_servers < 1 || params.max_queries < 1) {
        throw Error(ErrorCode::BadParams, "verify needs trials >= 0 and positive maxima");
    }
    constexpr TreeShape kShapes[] = {TreeShape::Random, TreeShape::Path, TreeShape::Star, TreeShape::Caterpillar,
                                     TreeShape::Binary};
    VerifyVerdict verdict;
    for (std::int64_t trial = 0; trial < params.trials; ++trial) {
        const auto trial_seed = mix_seed(params.seed, static_cast<std::uint64_t>(trial));
        Rng rng(trial_seed);
        const auto n = rng.uniform(1, params.max_nodes);
        const auto k = rng.uniform(1, params.max_servers);
        const auto m = rng.uniform(1, params.max_queries);
        const auto shape = kShapes[rng.uniform(0, 4)];
        const auto instance = generate_instance(n, k, m, trial_seed, shape);
        verify_one(instance, params, verdict,
                   params.repro_dir / ("verify_mismatch_seed" + std::to_string(params.seed) + "_trial" +
                                       std::to_string(trial) + ".txt"));
    }
    return verdict;
}

VerifyVerdict run_verify(const Instance& instance, const VerifyParams& params) {
    VerifyVerdict verdict;
    verify_one(instance, params, verdict, params.repro_dir / "verify_mismatch_instance.txt");
    return verdict;
}

// ---------------------------------------------------------------------------
// Benchmarks

namespace {

using Clock = std::chrono::steady_clock;

// Keeps freed blocks mapped so repeated runs do not pay for fresh page faults.
void retain_freed_memory() {
#ifdef __GLIBC__
    static const bool done = [] {
        mallopt(M_MMAP_THRESHOLD, 1 << 30);
        mallopt(M_TRIM_THRESHOLD, std::numeric_limits<int>::max());
        return true;
    }();
    (void)done;
#endif
}

std::int64_t elapsed_ns(Clock::time_point start, Clock::time_point stop) {
    return std::max<std::int64_t>(1, std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count());
}

}  // namespace

std::int64_t time_preprocess(const Instance& instance) {
    retain_freed_memory();
    const auto start = Clock::now();
    auto pt = preprocess_instance(instance);
    const auto stop = Clock::now();
    // Keep the result observable so the work cannot be elided.
    volatile auto sink = pt.ancestry.depth(NodeId{instance.n});
    (void)sink;
    return elapsed_ns(start, stop);
}

QueryTiming time_queries(const PreprocessedTree& pt, const Instance& instance, EngineKind engine) {
    retain_freed_memory();
    const auto& requests = instance.requests;
    const auto warmup = std::min<std::size_t>(requests.size(), 200);
    std::vector<std::int64_t> samples;
    samples.reserve(requests.size());
    QueryTiming timing;

    if (engine == EngineKind::Fast) {
        {
            Engine scratch(pt, ServerConfiguration(pt.size(), instance.initial_servers));
            for (std::size_t i = 0; i < warmup; ++i) scratch.process(requests[i]);
        }
        Engine fast(pt, ServerConfiguration(pt.size(), instance.initial_servers));
        for (const NodeId q : requests) {
            const auto start = Clock::now();
            const auto outcome = fast.process(q);
            const auto stop = Clock::now();
            samples.push_back(elapsed_ns(start, stop));
            timing.total_cost += outcome.cost;
        }
    } else {
        {
            ServerConfiguration scratch(pt.size(), instance.initial_servers);
            for (std::size_t i = 0; i < warmup; ++i) naive_query(pt, scratch, requests[i]);
        }
        ServerConfiguration config(pt.size(), instance.initial_servers);
        for (const NodeId q : requests) {
            const auto start = Clock::now();
            const auto result = naive_query(pt, config, q);
            const auto stop = Clock::now();
            samples.push_back(elapsed_ns(start, stop));
            timing.total_cost += result.outcome.cost;
        }
    }

    if (samples.empty()) return timing;
    std::int64_t sum = 0;
    for (const auto s : samples) sum += s;
    timing.mean_ns = std::max<std::int64_t>(1, sum / static_cast<std::int64_t>(samples.size()));
    const auto rank = (samples.size() * 99 + 99) / 100 - 1;
    std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(rank), samples.end());
    timing.p99_ns = samples[rank];
    return timing;
}

std::vector<BenchRecord> run_bench(const BenchParams& params) {
    if (params.nodes.empty() || params.servers.empty() || params.queries < 1 || params.engines.empty()) {
        throw Error(ErrorCode::BadParams, "bench needs node sizes, server counts, engines and queries >= 1");
    }
    std::vector<BenchRecord> records;
    for (const auto n : params.nodes) {
        for (const auto k : params.servers) {
            const auto instance = generate_instance(n, k, params.queries, params.seed, params.shape);
            const auto preprocess_ns = time_preprocess(instance);
            const auto pt = preprocess_instance(instance);
            for (const auto engine : params.engines) {
                const auto timing = time_queries(pt, instance, engine);
                records.push_back({n, k, params.queries, engine, preprocess_ns, timing.mean_ns, timing.p99_ns,
                                   timing.total_cost});
            }
        }
    }
    return records;
}

std::string bench_csv(const std::vector<BenchRecord>& records) {
    std::ostringstream os;
    os << "n,k,m,engine,preprocess_ns,mean_query_ns,p99_query_ns,total_cost\n";
    for (const auto& r : records) {
        os << r.n << ',' << r.k << ',' << r.m << ',' << to_string(r.engine) << ',' << r.preprocess_ns << ','
           << r.mean_query_ns << ',' << r.p99_query_ns << ',' << r.total_cost << '\n';
    }
    return os.str();
}

}  // namespace kserver
