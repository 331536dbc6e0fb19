#include "cdsu/forest.hpp"

#include <algorithm>

namespace cdsu {

const char* to_string(LinkRule r) {
    switch (r) {
        case LinkRule::index: return "index";
        case LinkRule::rank_dcas: return "rank-dcas";
        case LinkRule::rank_rand: return "rank-rand";
    }
    return "?";
}

const char* to_string(FindRule r) {
    switch (r) {
        case FindRule::naive: return "naive";
        case FindRule::one_try: return "one";
        case FindRule::two_try: return "two";
        case FindRule::cond_two_try: return "cond-two";
    }
    return "?";
}

// Serializes the access and assigns its stamp while the lock is held. In
// non-verify mode this is a no-op and stamps stay 0.
struct Forest::StampGuard {
    Forest& f;
    uint64_t stamp = 0;
    std::unique_lock<std::mutex> lock;

    explicit StampGuard(Forest& forest) : f(forest) {
        if (f.cfg_.verify) {
            lock = std::unique_lock<std::mutex>(f.verify_mu_);
            stamp = f.clock_.fetch_add(1, std::memory_order_seq_cst);
        }
    }
};

Forest::Forest(const ForestConfig& cfg) : cfg_(cfg) {
    if (cfg_.n == 0) throw std::invalid_argument("forest: element count must be positive");
    if (cfg_.max_procs == 0) throw std::invalid_argument("forest: need at least one process");
    const bool uses_ranks = cfg_.link != LinkRule::index;
    if (uses_ranks && cfg_.rank_impl == RankImpl::helping) {
        if (cfg_.n > kMaxHelpingNodes)
            throw std::invalid_argument("forest: helping mode supports fewer than 2^24 nodes");
        rank_cap_ = std::min<uint32_t>(cfg_.n - 1, kMaxHelpingRank);
    } else {
        rank_cap_ = cfg_.n - 1;
    }

    parent_ = std::make_unique<std::atomic<Node>[]>(cfg_.n);
    rank_word_ = std::make_unique<std::atomic<uint64_t>[]>(cfg_.n);
    shadow_ = std::make_unique<std::atomic<Node>[]>(cfg_.n);
    for (Node i = 0; i < cfg_.n; i++) {
        parent_[i].store(i, std::memory_order_relaxed);
        rank_word_[i].store(0, std::memory_order_relaxed);
        shadow_[i].store(i, std::memory_order_relaxed);
    }
    if (cfg_.verify) install_stamp_.assign(cfg_.n, 0);
    det_desc_ = std::vector<std::atomic<uint64_t>>(cfg_.max_procs + 1);
    rand_desc_ = std::vector<std::atomic<uint64_t>>(cfg_.max_procs + 1);
    counters_.resize(cfg_.max_procs + 1);
}

AccessResult Forest::read_parent(int proc, Node x) {
    counters_[proc].reads++;
    StampGuard g(*this);
    return {parent_[x].load(std::memory_order_seq_cst), true, g.stamp};
}

AccessResult Forest::read_rank_word(int proc, Node x) {
    counters_[proc].reads++;
    StampGuard g(*this);
    return {rank_word_[x].load(std::memory_order_seq_cst), true, g.stamp};
}

void Forest::check_compaction(Node x, Node expected, Node desired) const {
    // Valid compaction: the new parent must be a proper ancestor of the
    // replaced parent in the union forest.
    if (!shadow_is_proper_ancestor(desired, expected))
        throw ValidityError("compaction on node " + std::to_string(x) + " replaced parent " +
                            std::to_string(expected) + " with non-ancestor " +
                            std::to_string(desired));
}

AccessResult Forest::cas_parent(int proc, Node x, Node expected, Node desired) {
    auto& c = counters_[proc];
    c.cas_attempts++;
    const bool is_install = expected == x;
    const bool is_change = expected != desired;
    if (cfg_.check_validity && !is_install && is_change) check_compaction(x, expected, desired);

    StampGuard g(*this);
    Node e = expected;
    const bool ok = parent_[x].compare_exchange_strong(e, desired, std::memory_order_seq_cst,
                                                       std::memory_order_seq_cst);
    if (!ok) c.cas_failures++;
    if (ok && is_install && is_change) {
        if (cfg_.record_shadow) {
            Node self = x;
            shadow_[x].compare_exchange_strong(self, desired, std::memory_order_seq_cst);
        }
        if (!install_stamp_.empty()) install_stamp_[x] = g.stamp;
    }
    return {uint64_t(e), ok, g.stamp};
}

AccessResult Forest::cas_rank_word(int proc, Node x, uint64_t expected, uint64_t desired) {
    if (rp_rank(desired) < rp_rank(expected))
        throw std::invalid_argument("cas_rank_word: rank may never decrease");
    auto& c = counters_[proc];
    c.cas_attempts++;
    StampGuard g(*this);
    uint64_t e = expected;
    const bool ok = rank_word_[x].compare_exchange_strong(e, desired, std::memory_order_seq_cst,
                                                          std::memory_order_seq_cst);
    if (!ok) c.cas_failures++;
    return {e, ok, g.stamp};
}

AccessResult Forest::read_det_descriptor(int proc, int owner) {
    counters_[proc].reads++;
    StampGuard g(*this);
    return {det_desc_[owner].load(std::memory_order_seq_cst), true, g.stamp};
}

AccessResult Forest::read_rand_descriptor(int proc, int owner) {
    counters_[proc].reads++;
    StampGuard g(*this);
    return {rand_desc_[owner].load(std::memory_order_seq_cst), true, g.stamp};
}

AccessResult Forest::write_det_descriptor(int proc, uint64_t word) {
    counters_[proc].reads++;
    StampGuard g(*this);
    det_desc_[proc].store(word, std::memory_order_seq_cst);
    return {word, true, g.stamp};
}

AccessResult Forest::write_rand_descriptor(int proc, uint64_t word) {
    counters_[proc].reads++;
    StampGuard g(*this);
    rand_desc_[proc].store(word, std::memory_order_seq_cst);
    return {word, true, g.stamp};
}

AccessResult Forest::cas_rand_descriptor(int proc, int owner, uint64_t expected,
                                         uint64_t desired) {
    auto& c = counters_[proc];
    c.cas_attempts++;
    StampGuard g(*this);
    uint64_t e = expected;
    const bool ok = rand_desc_[owner].compare_exchange_strong(
        e, desired, std::memory_order_seq_cst, std::memory_order_seq_cst);
    if (!ok) c.cas_failures++;
    return {e, ok, g.stamp};
}

AccessResult Forest::elink_dcas(int proc, Node u, Node v, uint32_t r) {
    if (cfg_.rank_impl != RankImpl::native)
        throw std::logic_error("elink_dcas requires the native rank implementation");
    auto& c = counters_[proc];
    c.cas_attempts++;
    StampGuard g(*this);
    const bool ok = parent_[u].load(std::memory_order_seq_cst) == u &&
                    parent_[v].load(std::memory_order_seq_cst) == v &&
                    rp_rank(rank_word_[u].load(std::memory_order_seq_cst)) == r &&
                    rp_rank(rank_word_[v].load(std::memory_order_seq_cst)) == r;
    if (ok) {
        parent_[u].store(v, std::memory_order_seq_cst);
        rank_word_[v].store(pack_rank_proc(r + 1, 0), std::memory_order_seq_cst);
        if (cfg_.record_shadow) {
            Node self = u;
            shadow_[u].compare_exchange_strong(self, v, std::memory_order_seq_cst);
        }
        if (!install_stamp_.empty()) install_stamp_[u] = g.stamp;
    } else {
        c.cas_failures++;
    }
    return {0, ok, g.stamp};
}

AccessResult Forest::cas_parent_rank(int proc, Node u, Node expected_parent, Node new_parent,
                                     uint32_t r) {
    if (cfg_.rank_impl != RankImpl::native)
        throw std::logic_error("cas_parent_rank requires the native rank implementation");
    auto& c = counters_[proc];
    c.cas_attempts++;
    const bool is_install = expected_parent == u;
    if (cfg_.check_validity && !is_install && expected_parent != new_parent)
        check_compaction(u, expected_parent, new_parent);
    StampGuard g(*this);
    const bool ok = parent_[u].load(std::memory_order_seq_cst) == expected_parent &&
                    rp_rank(rank_word_[u].load(std::memory_order_seq_cst)) == r;
    if (ok) {
        parent_[u].store(new_parent, std::memory_order_seq_cst);
        if (is_install && expected_parent != new_parent) {
            if (cfg_.record_shadow) {
                Node self = u;
                shadow_[u].compare_exchange_strong(self, new_parent, std::memory_order_seq_cst);
            }
            if (!install_stamp_.empty()) install_stamp_[u] = g.stamp;
        }
    } else {
        c.cas_failures++;
    }
    return {0, ok, g.stamp};
}

AccessResult Forest::cas_rank_if_root(int proc, Node u, uint32_t r) {
    if (cfg_.rank_impl != RankImpl::native)
        throw std::logic_error("cas_rank_if_root requires the native rank implementation");
    auto& c = counters_[proc];
    c.cas_attempts++;
    StampGuard g(*this);
    const bool ok = parent_[u].load(std::memory_order_seq_cst) == u &&
                    rp_rank(rank_word_[u].load(std::memory_order_seq_cst)) == r;
    if (ok) {
        rank_word_[u].store(pack_rank_proc(r + 1, 0), std::memory_order_seq_cst);
    } else {
        c.cas_failures++;
    }
    return {0, ok, g.stamp};
}

CounterTotals Forest::totals() const {
    CounterTotals t;
    for (const auto& c : counters_) {
        t.visits += c.visits;
        t.reads += c.reads;
        t.cas_attempts += c.cas_attempts;
        t.cas_failures += c.cas_failures;
        t.link_attempts += c.link_attempts;
        t.help_steps += c.help_steps;
        t.ops += c.ops;
        t.max_op_visits = std::max(t.max_op_visits, c.max_op_visits);
    }
    return t;
}

bool Forest::shadow_is_proper_ancestor(Node anc, Node below) const {
    Node cur = below;
    for (Node i = 0; i < cfg_.n; i++) {
        Node next = shadow_[cur].load(std::memory_order_seq_cst);
        if (next == cur) return false;  // reached a shadow root without meeting anc
        if (next == anc) return true;
        cur = next;
    }
    return false;
}

ForestSnapshot Forest::snapshot() const {
    ForestSnapshot s;
    s.parents.resize(cfg_.n);
    s.ranks.resize(cfg_.n);
    for (Node i = 0; i < cfg_.n; i++) {
        s.parents[i] = parent_[i].load(std::memory_order_seq_cst);
        s.ranks[i] = rp_rank(rank_word_[i].load(std::memory_order_seq_cst));
    }
    return s;
}

}  // namespace cdsu
