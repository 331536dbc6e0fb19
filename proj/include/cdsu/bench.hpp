#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cdsu/ackermann.hpp"
#include "cdsu/oracle.hpp"
#include "cdsu/sim.hpp"

// Workload generation, the threaded and simulated runners, and CSV output.

namespace cdsu {

enum class PairDist { uniform, biased, binomial_script };

const char* to_string(PairDist d);

struct WorkloadSpec {
    Node n = 0;
    uint64_t m = 0;
    int p = 1;
    double mix_unite = 1.0;  // fractions must sum to 1
    double mix_find = 0.0;
    double mix_same = 0.0;
    PairDist pairs = PairDist::uniform;
    uint64_t seed = 1;
};

// Deterministic per seed; operations dealt round-robin to processes.
std::vector<std::vector<OpSpec>> generate_workload(const WorkloadSpec& spec);

// The scripted unite sequence of the pairwise-rounds tree builder.
std::vector<OpSpec> binomial_unite_script(Node n);

// Workload files: lines "U x y" | "F x" | "S x y", optionally prefixed
// "@<proc>"; '#' comments. Unprefixed ops are dealt round-robin.
std::vector<std::vector<OpSpec>> parse_workload(std::istream& in, int procs);
std::vector<std::vector<OpSpec>> parse_workload_file(const std::string& path, int procs);

struct RunReport {
    Node n = 0;
    uint64_t m = 0;
    int p = 0;
    LinkRule link = LinkRule::index;
    FindRule find = FindRule::one_try;
    uint64_t seed = 0;
    std::string mode;  // "threads" or "sim"
    CounterTotals totals;
    uint32_t max_rank = 0;
    uint32_t forest_height = 0;
    double wall_ms = 0;
    std::optional<double> ratio;  // total visits / work bound; empty without splitting
    bool verified = true;         // false when any enabled check failed
    std::string failure;

    ForestSnapshot snapshot;  // final state, for callers that inspect structure
};

Splitting splitting_of(FindRule find);

// Spawns p workers behind a start barrier; each runs its operation list to
// completion. With verify on, operations are logged and the run is checked
// by linearization replay and partition equivalence afterwards.
RunReport run_threads(const WorkloadSpec& spec, ForestConfig cfg, bool verify);

// Runs the same workload under the simulator. Verification always on.
RunReport run_sim(const WorkloadSpec& spec, ForestConfig cfg, const Schedule& schedule,
                  const std::vector<std::vector<OpSpec>>* programs = nullptr);

// Exact columns:
// n,m,p,link,find,seed,mode,total_visits,total_cas,cas_failures,max_rank,wall_ms,ratio
void emit_csv(std::span<const RunReport> reports, const std::string& path, bool append);
void emit_csv(std::span<const RunReport> reports, std::ostream& out, bool header);

}  // namespace cdsu
