#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

// Shared-memory state for the concurrent union-find structure: per-node
// atomic parent and (rank, process, tag) words, per-process work counters,
// helping descriptors and the union-forest shadow used by validity checks.
// Every shared access the algorithms make goes through this class, in both
// real-thread and simulated execution, so counting and verification hooks
// live in exactly one place.

namespace cdsu {

using Node = uint32_t;

enum class LinkRule { index, rank_dcas, rank_rand };
enum class FindRule { naive, one_try, two_try, cond_two_try };

// How rank links are realized. `native` performs the multi-word atomic
// steps directly and is only available under the simulator, which executes
// one step at a time on one thread. `helping` is the CAS-only protocol with
// per-process descriptors and works on real threads too.
enum class RankImpl { native, helping };

const char* to_string(LinkRule r);
const char* to_string(FindRule r);

// Value and success flag of one shared access, plus the access's position in
// the global serialization when verify mode is on (0 otherwise). The stamp is
// taken while the access is still holding the serialization lock, so it is
// exact even under real threads.
struct AccessResult {
    uint64_t value = 0;
    bool ok = false;
    uint64_t stamp = 0;
};

// ---------------------------------------------------------------------------
// rank/process word: rank in the low 32 bits, process id in the next 16,
// claim tag in the top 16. The tag is 0 except on claims placed by the
// randomized helping protocol, which needs it to tell a live claim from the
// tombstone a finished claim leaves on a node that became a child.
// ---------------------------------------------------------------------------

constexpr uint64_t pack_rank_proc(uint32_t rank, uint16_t proc, uint16_t tag = 0) {
    return uint64_t(rank) | (uint64_t(proc) << 32) | (uint64_t(tag) << 48);
}
constexpr uint32_t rp_rank(uint64_t w) { return static_cast<uint32_t>(w); }
constexpr uint16_t rp_proc(uint64_t w) { return static_cast<uint16_t>(w >> 32); }
constexpr uint16_t rp_tag(uint64_t w)  { return static_cast<uint16_t>(w >> 48); }

// ---------------------------------------------------------------------------
// Helping descriptors, each packed into one atomic word so that readers can
// never observe a torn announcement.
//
// Deterministic links: child x, target y, rank r, and whether the ranks were
// equal (equal links install y itself and then bump y's rank; unequal links
// install y's current parent and never bump).
//
// Randomized links: target y, rank r, flag, and a sequence number. The flag
// is null until resolved, then parent-change or rank-bump; flag and payload
// share a word so a late helper cannot pair an old payload with a new flag.
// ---------------------------------------------------------------------------

inline constexpr uint32_t kMaxHelpingNodes = 1u << 24;
inline constexpr uint32_t kMaxHelpingRank = (1u << 14) - 1;

inline constexpr uint8_t kFlagNull = 0;
inline constexpr uint8_t kFlagParentChange = 1;
inline constexpr uint8_t kFlagRankBump = 2;

struct DetDescriptor {
    Node x = 0;
    Node y = 0;
    uint32_t rank = 0;
    bool equal_ranks = false;

    uint64_t pack() const {
        return uint64_t(x) | (uint64_t(y) << 24) | (uint64_t(rank) << 48) |
               (uint64_t(equal_ranks ? 1 : 0) << 62);
    }
    static DetDescriptor unpack(uint64_t w) {
        DetDescriptor d;
        d.x = static_cast<Node>(w & 0xffffff);
        d.y = static_cast<Node>((w >> 24) & 0xffffff);
        d.rank = static_cast<uint32_t>((w >> 48) & 0x3fff);
        d.equal_ranks = ((w >> 62) & 1) != 0;
        return d;
    }
};

struct RandDescriptor {
    Node y = 0;
    uint32_t rank = 0;
    uint8_t flag = kFlagNull;
    uint16_t seq = 0;

    uint64_t pack() const {
        return uint64_t(y) | (uint64_t(rank) << 24) | (uint64_t(flag & 3) << 38) |
               (uint64_t(seq) << 40);
    }
    static RandDescriptor unpack(uint64_t w) {
        RandDescriptor d;
        d.y = static_cast<Node>(w & 0xffffff);
        d.rank = static_cast<uint32_t>((w >> 24) & 0x3fff);
        d.flag = static_cast<uint8_t>((w >> 38) & 3);
        d.seq = static_cast<uint16_t>(w >> 40);
        return d;
    }
};

// ---------------------------------------------------------------------------

struct alignas(64) ProcCounters {
    uint64_t visits = 0;
    uint64_t reads = 0;
    uint64_t cas_attempts = 0;
    uint64_t cas_failures = 0;
    uint64_t link_attempts = 0;
    uint64_t help_steps = 0;
    uint64_t ops = 0;
    uint64_t max_op_visits = 0;
};

struct CounterTotals {
    uint64_t visits = 0, reads = 0, cas_attempts = 0, cas_failures = 0;
    uint64_t link_attempts = 0, help_steps = 0, ops = 0, max_op_visits = 0;
    uint64_t total_steps() const { return reads + cas_attempts; }
};

struct ForestConfig {
    Node n = 0;
    uint16_t max_procs = 1;  // process ids run 1..max_procs; 0 means unclaimed
    LinkRule link = LinkRule::index;
    FindRule find = FindRule::one_try;
    RankImpl rank_impl = RankImpl::helping;
    bool rand_cas_flag = false;   // resolve randomized flags by CAS-with-random-bit
    bool record_shadow = true;    // union-forest first-parent recording
    bool check_validity = false;  // verify compaction CASes against the shadow
    bool verify = false;          // serialized accesses + linearization stamps
    bool finds_help = false;      // finds never help by default
};

struct ForestSnapshot {
    std::vector<Node> parents;
    std::vector<uint32_t> ranks;
};

struct ValidityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Forest {
public:
    explicit Forest(const ForestConfig& cfg);

    Forest(const Forest&) = delete;
    Forest& operator=(const Forest&) = delete;

    const ForestConfig& config() const { return cfg_; }
    Node size() const { return cfg_.n; }
    uint32_t rank_cap() const { return rank_cap_; }

    // --- atomic accesses; `proc` is the acting process (1-based) -----------

    AccessResult read_parent(int proc, Node x);
    AccessResult read_rank_word(int proc, Node x);

    // Parent CAS. A successful transition away from self is a link install
    // and records the node's first parent in the union-forest shadow; any
    // other change is a compaction and, when validity checking is on, must
    // install a proper shadow ancestor of the value it replaces.
    AccessResult cas_parent(int proc, Node x, Node expected, Node desired);

    AccessResult cas_rank_word(int proc, Node x, uint64_t expected, uint64_t desired);

    AccessResult read_det_descriptor(int proc, int owner);
    AccessResult read_rand_descriptor(int proc, int owner);
    AccessResult write_det_descriptor(int proc, uint64_t word);
    AccessResult write_rand_descriptor(int proc, uint64_t word);
    AccessResult cas_rand_descriptor(int proc, int owner, uint64_t expected, uint64_t desired);

    // --- multi-word atomic steps (simulator-only; see RankImpl::native) ----

    // Make v the parent of u and increment v's rank, provided u and v are
    // both roots of rank r. One atomic step.
    AccessResult elink_dcas(int proc, Node u, Node v, uint32_t r);
    // Change u's parent from expected_parent to new_parent provided u's rank
    // is still r. One atomic step.
    AccessResult cas_parent_rank(int proc, Node u, Node expected_parent, Node new_parent,
                                 uint32_t r);
    // Increment u's rank from r provided u is a root of rank r. One step.
    AccessResult cas_rank_if_root(int proc, Node u, uint32_t r);

    // --- bookkeeping --------------------------------------------------------

    void count_visit(int proc) { counters_[proc].visits++; }
    void count_link_attempt(int proc) { counters_[proc].link_attempts++; }
    void count_help_step(int proc) { counters_[proc].help_steps++; }
    void finish_op(int proc, uint64_t op_visits) {
        auto& c = counters_[proc];
        c.ops++;
        if (op_visits > c.max_op_visits) c.max_op_visits = op_visits;
    }

    ProcCounters& counters(int proc) { return counters_[proc]; }
    CounterTotals totals() const;

    uint64_t clock_now() const { return clock_.load(std::memory_order_seq_cst); }
    // Stamp of the install CAS that made x a child (verify mode only); 0
    // while x is a root. Written while holding the serialization lock, so a
    // reader that performed any later access sees it.
    uint64_t install_stamp(Node x) const {
        return install_stamp_.empty() ? 0 : install_stamp_[x];
    }

    // Union-forest shadow: x's first non-self parent, or x if none yet.
    Node shadow_parent(Node x) const { return shadow_[x].load(std::memory_order_seq_cst); }
    bool shadow_is_proper_ancestor(Node anc, Node below) const;

    // Uncounted, unstamped reads for invariant checkers and quiescent
    // inspection. Not part of the algorithms' access accounting.
    Node parent_unsafe(Node x) const { return parent_[x].load(std::memory_order_seq_cst); }
    uint64_t rank_word_unsafe(Node x) const {
        return rank_word_[x].load(std::memory_order_seq_cst);
    }
    uint32_t rank_unsafe(Node x) const { return rp_rank(rank_word_unsafe(x)); }
    uint64_t det_desc_unsafe(int owner) const {
        return det_desc_[owner].load(std::memory_order_seq_cst);
    }
    uint64_t rand_desc_unsafe(int owner) const {
        return rand_desc_[owner].load(std::memory_order_seq_cst);
    }

    // Quiescent whole-structure copy. Caller must guarantee no operation is
    // in flight.
    ForestSnapshot snapshot() const;

private:
    struct StampGuard;

    void check_compaction(Node x, Node expected, Node desired) const;

    ForestConfig cfg_;
    uint32_t rank_cap_ = 0;
    std::unique_ptr<std::atomic<Node>[]> parent_;
    std::unique_ptr<std::atomic<uint64_t>[]> rank_word_;
    std::unique_ptr<std::atomic<Node>[]> shadow_;
    std::vector<uint64_t> install_stamp_;
    std::vector<std::atomic<uint64_t>> det_desc_;
    std::vector<std::atomic<uint64_t>> rand_desc_;
    std::vector<ProcCounters> counters_;

    std::mutex verify_mu_;
    std::atomic<uint64_t> clock_{1};
};

}  // namespace cdsu
