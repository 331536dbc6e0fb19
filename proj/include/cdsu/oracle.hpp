#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cdsu/records.hpp"

// Sequential reference implementation and the correctness checkers run
// against concurrent executions: partition equivalence, linearization
// replay, and statistical rank checks.

namespace cdsu {

enum class SeqLink { rank, size, index };
enum class SeqCompaction { none, compression, splitting, halving };

// Textbook compressed-forest union-find. Deterministic given the operation
// sequence; used both as the answer oracle and as the replay engine.
class SequentialDSU {
public:
    SequentialDSU(Node n, SeqLink link = SeqLink::rank,
                  SeqCompaction compaction = SeqCompaction::compression);
    // Fixture constructor: adopt an explicit (acyclic) parent array.
    SequentialDSU(std::vector<Node> parents, SeqLink link, SeqCompaction compaction);

    Node find(Node x);
    void unite(Node x, Node y);
    bool same_set(Node x, Node y) { return find(x) == find(y); }

    Node n() const { return static_cast<Node>(parent_.size()); }
    Node parent(Node x) const { return parent_[x]; }
    uint64_t visits() const { return visits_; }  // find-loop iterations incl. start node

private:
    Node root_of(Node x);
    void compact(Node x, Node root);

    SeqLink link_;
    SeqCompaction compaction_;
    std::vector<Node> parent_;
    std::vector<uint32_t> rank_;  // rank or size depending on rule
    uint64_t visits_ = 0;
};

// Canonical labeling of a partition: each node mapped to the smallest node
// index in its set.
struct PartitionSummary {
    std::vector<Node> label;
    bool operator==(const PartitionSummary& o) const = default;
};

PartitionSummary partition_of_parents(const std::vector<Node>& parents);
PartitionSummary partition_of_edges(Node n, std::span<const std::pair<Node, Node>> edges);
// Independent second component algorithm (iterated label propagation), used
// to cross-check partition_of_edges.
PartitionSummary partition_by_label_propagation(Node n,
                                                std::span<const std::pair<Node, Node>> edges);

struct CheckResult {
    bool ok = true;
    std::string witness;  // human-readable description of the first failure

    explicit operator bool() const { return ok; }
};

// The final forest must partition nodes exactly as the connected components
// of the executed unite pairs.
CheckResult check_partition(const ForestSnapshot& snapshot,
                            std::span<const std::pair<Node, Node>> unite_pairs);

struct ReplayResult {
    bool ok = true;
    size_t first_bad = 0;  // index into the stamp-sorted record order
    std::string reason;

    explicit operator bool() const { return ok; }
};

// Replays records in linearization-stamp order through a sequential
// union-find and checks that every recorded answer is consistent with set
// membership at its prefix. Duplicate stamps are a malformed history.
ReplayResult replay_linearization(std::span<const OpRecord> records, Node n);

// Oracle runner: answers for each operation plus the final partition.
struct OracleOutput {
    std::vector<uint64_t> answers;  // find -> root, same-set -> 0/1, unite -> root after
    PartitionSummary partition;
    uint64_t visits = 0;
};
OracleOutput oracle_run(Node n, SeqLink link, SeqCompaction compaction,
                        std::span<const OpSpec> ops);

// Mean count of nodes with rank >= k across seeded runs, checked against
// bound + 3 standard errors of the mean.
struct RankStats {
    double mean = 0;
    double stderr_mean = 0;
    double bound = 0;  // n / 2^k
    uint32_t max_rank_seen = 0;
    bool within = false;
};
RankStats check_rank_stats(std::span<const std::vector<uint32_t>> rank_snapshots, uint32_t k,
                           Node n);

}  // namespace cdsu
