#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kserver/oracles.hpp"

namespace kserver {

enum class TreeShape { Random, Path, Star, Caterpillar, Binary };

std::optional<TreeShape> parse_shape(std::string_view name);
std::string_view to_string(TreeShape shape);

/// A tree, k initial server positions (may repeat) and m requests.
struct Instance {
    std::int32_t n = 0;
    std::int32_t k = 0;
    std::int32_t m = 0;
    std::vector<Edge> edges;
    std::vector<NodeId> initial_servers;
    std::vector<NodeId> requests;

    friend bool operator==(const Instance&, const Instance&) = default;
};

/// Text format:
///   line 1            "n k m"
///   next n-1 lines    "u v" edges
///   next line         k server nodes (server id = position on the line)
///   next line         m request nodes
/// Lines starting with '#' and blank lines are ignored.
Instance parse_instance(std::string_view text);
std::string serialize_instance(const Instance& instance);
Instance load_instance(const std::filesystem::path& path);
void save_instance(const Instance& instance, const std::filesystem::path& path);

/// Deterministic for fixed arguments. Random shape attaches node i to a
/// uniform node in [1, i-1].
Instance generate_instance(std::int32_t n, std::int32_t k, std::int32_t m, std::uint64_t seed, TreeShape shape);

enum class EngineKind { Fast, Naive };

std::optional<EngineKind> parse_engine(std::string_view name);
std::string_view to_string(EngineKind engine);

struct QueryReport {
    ServerId serving;
    Length cost = 0;

    friend bool operator==(const QueryReport&, const QueryReport&) = default;
};

struct SolveReport {
    std::vector<QueryReport> queries;
    Length total_cost = 0;
    std::vector<NodeId> final_positions;
};

SolveReport run_solve(const Instance& instance, EngineKind engine, const EngineOptions& options = {});
/// "serving_id cost" per request, then "TOTAL total_cost".
std::string format_solve_report(const SolveReport& report);

struct VerifyParams {
    std::int64_t trials = 1000;
    std::int32_t max_nodes = 200;
    std::int32_t max_servers = 8;
    std::int32_t max_queries = 50;
    std::uint64_t seed = 1;
    bool with_opt = false;
    EngineOptions fast_options;
    std::filesystem::path repro_dir = ".";
};

struct VerifyVerdict {
    std::int64_t trials = 0;
    std::int64_t queries = 0;
    std::int64_t opt_trials = 0;
    std::optional<double> max_ratio;
};

/// Thrown on the first disagreement between the fast engine and the naive
/// simulator. The failing instance has been written to repro_path().
class MismatchError : public Error {
public:
    MismatchError(const std::string& what, std::filesystem::path repro)
        : Error(ErrorCode::MismatchFound, what + " (repro: " + repro.string() + ")"), repro_(std::move(repro)) {}

    const std::filesystem::path& repro_path() const { return repro_; }

private:
    std::filesystem::path repro_;
};

/// Runs both engines query by query. Returns a description of the first
/// disagreement in serving id, per-query cost or positions, if any.
std::optional<std::string> compare_engines(const Instance& instance, const EngineOptions& fast_options = {});

VerifyVerdict run_verify(const VerifyParams& params);
/// Single-instance variant used for replaying repro files.
VerifyVerdict run_verify(const Instance& instance, const VerifyParams& params);

struct BenchParams {
    std::vector<std::int32_t> nodes;
    std::vector<std::int32_t> servers;
    TreeShape shape = TreeShape::Random;
    std::uint64_t seed = 1;
    std::int32_t queries = 1000;
    std::vector<EngineKind> engines{EngineKind::Fast};
};

struct BenchRecord {
    std::int32_t n = 0;
    std::int32_t k = 0;
    std::int32_t m = 0;
    EngineKind engine = EngineKind::Fast;
    std::int64_t preprocess_ns = 0;
    std::int64_t mean_query_ns = 0;
    std::int64_t p99_query_ns = 0;
    Length total_cost = 0;
};

/// Builds the tree and runs the full preprocessing once, returning wall time.
/// On glibc the first timing call stops the allocator from returning freed
/// memory to the OS, so later runs reuse mapped pages.
std::int64_t time_preprocess(const Instance& instance);

struct QueryTiming {
    std::int64_t mean_ns = 0;
    std::int64_t p99_ns = 0;
    Length total_cost = 0;
};

/// Times every request individually after an untimed warm-up pass over a
/// copy of the initial configuration.
QueryTiming time_queries(const PreprocessedTree& pt, const Instance& instance, EngineKind engine);

std::vector<BenchRecord> run_bench(const BenchParams& params);
std::string bench_csv(const std::vector<BenchRecord>& records);

}  // namespace kserver
