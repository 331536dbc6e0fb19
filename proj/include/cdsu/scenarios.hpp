#pragma once

#include <cstdint>
#include <vector>

#include "cdsu/sim.hpp"

// Scripted constructions and adversarial schedules: binomial trees, random
// index trees with designated nodes, the wake-up reduction, the linear-path
// schedule that breaks index linking when the scheduler can see the random
// order, and the shadowed-find workload behind the logarithmic term.

namespace cdsu {

// Depth of x in the parent snapshot (edges to the root).
uint32_t depth_in(const std::vector<Node>& parents, Node x);
// Maximum depth over all nodes.
uint32_t height_of(const std::vector<Node>& parents);

// Pairwise-unite rounds over nodes [0, k): roots united left-to-right, each
// round completing before the next. Under deterministic rank linking this
// yields a binomial-shaped tree of height floor(lg k) regardless of the find
// rule, because all finds start at roots. Leftover nodes beyond the largest
// power of two are united into the main root at the end. Runs on process 1
// of `run`; returns the final root.
Node build_binomial_tree(SimRun& run, Node k);

struct RandomIndexTree {
    Node root = 0;
    std::vector<Node> members;              // the k participating node ids
    std::vector<std::vector<Node>> designated;  // per round, designated node per tree
};

// Round-combined tree over k random node ids (ids are the random order that
// index linking consumes). Each round unites designated nodes of adjacent
// trees and refines the designated node to one belonging to the winning
// root's tree. Use a splitting find; the designated nodes then stay within
// depth 2.
RandomIndexTree build_random_index_tree(SimRun& run, Node k, uint64_t seed);

// ---------------------------------------------------------------------------

struct WakeupResult {
    std::vector<bool> returned_true;  // per process, 1-based at index 1
    bool at_least_one_true = false;
    bool none_true_before_all_started = false;
};

// k processes on k+1 nodes; process j runs unite(j-1, j), then compares
// find(0) with find(k).
WakeupResult scenario_wakeup(const ForestConfig& cfg, int k, const Schedule& schedule,
                             uint64_t sim_seed);

// ---------------------------------------------------------------------------

struct PathScenarioReport {
    Node s = 0;                  // path length attempted (floor sqrt p)
    uint32_t max_depth = 0;      // deepest member after the build phase
    double mean_member_depth = 0;
    double mean_find_visits = 0;  // per measurement find
    uint64_t total_visits = 0;
    uint64_t total_steps = 0;
};

// Index linking over randomly chosen node ids. p/2 builder processes hold
// the pairwise unites of an s-node set. With the adversary on, the schedule
// inspects the ids and serializes exactly the adjacent-pair unites first,
// forcing a linear path; off, builders run in an order fixed before looking
// at ids. Then p/2 processes run one find each on random members, lock-step.
PathScenarioReport scenario_sqrt_p_path(Node n, int p, FindRule find, uint64_t seed,
                                        bool adversary);

struct LowerBoundReport {
    uint64_t groups = 0;
    Node group_size = 0;
    uint64_t finds = 0;           // m = groups * p
    uint64_t total_visits = 0;
    uint64_t total_steps = 0;     // the work measure
    double bound = 0;             // m * lg(np/m + 1)
    double ratio = 0;             // total_steps / bound (0 when empty)
};

// Partition nodes into m/p groups of np/m, build each group into a binomial
// tree, then run p lock-step finds on the deepest node of every group.
// Degenerate when np/m < 2: zero groups, empty report.
LowerBoundReport scenario_log_lowerbound(Node n, int p, uint64_t m, LinkRule link,
                                         RankImpl rank_impl, FindRule find, uint64_t seed);

}  // namespace cdsu
