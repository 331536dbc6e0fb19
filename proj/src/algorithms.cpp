#include "cdsu/algorithms.hpp"

#include <algorithm>
#include <bit>

namespace cdsu {

const char* to_string(AccessKind k) {
    switch (k) {
        case AccessKind::read_parent: return "read-parent";
        case AccessKind::read_rank_word: return "read-rank";
        case AccessKind::cas_parent: return "cas-parent";
        case AccessKind::cas_rank_word: return "cas-rank";
        case AccessKind::read_det_desc: return "read-det-desc";
        case AccessKind::read_rand_desc: return "read-rand-desc";
        case AccessKind::write_det_desc: return "write-det-desc";
        case AccessKind::write_rand_desc: return "write-rand-desc";
        case AccessKind::cas_rand_desc: return "cas-rand-desc";
        case AccessKind::elink_dcas: return "elink-dcas";
        case AccessKind::cas_parent_rank: return "cas-parent-rank";
        case AccessKind::cas_rank_if_root: return "cas-rank-if-root";
        case AccessKind::none: return "none";
    }
    return "?";
}

const char* to_string(OpKind k) {
    switch (k) {
        case OpKind::find: return "find";
        case OpKind::unite: return "unite";
        case OpKind::same_set: return "same-set";
    }
    return "?";
}

AccessResult perform_access(Forest& f, int proc, const Access& a) {
    switch (a.kind) {
        case AccessKind::read_parent: return f.read_parent(proc, a.a);
        case AccessKind::read_rank_word: return f.read_rank_word(proc, a.a);
        case AccessKind::cas_parent:
            return f.cas_parent(proc, a.a, static_cast<Node>(a.expected),
                                static_cast<Node>(a.desired));
        case AccessKind::cas_rank_word: return f.cas_rank_word(proc, a.a, a.expected, a.desired);
        case AccessKind::read_det_desc: return f.read_det_descriptor(proc, static_cast<int>(a.a));
        case AccessKind::read_rand_desc:
            return f.read_rand_descriptor(proc, static_cast<int>(a.a));
        case AccessKind::write_det_desc: return f.write_det_descriptor(proc, a.desired);
        case AccessKind::write_rand_desc: return f.write_rand_descriptor(proc, a.desired);
        case AccessKind::cas_rand_desc:
            return f.cas_rand_descriptor(proc, static_cast<int>(a.a), a.expected, a.desired);
        case AccessKind::elink_dcas: return f.elink_dcas(proc, a.a, a.b, a.rank);
        case AccessKind::cas_parent_rank:
            return f.cas_parent_rank(proc, a.a, static_cast<Node>(a.expected),
                                     static_cast<Node>(a.desired), a.rank);
        case AccessKind::cas_rank_if_root: return f.cas_rank_if_root(proc, a.a, a.rank);
        case AccessKind::none: break;
    }
    throw std::logic_error("perform_access: empty access");
}

// ---------------------------------------------------------------------------
// finds
// ---------------------------------------------------------------------------

OpTask<FindResult> find_naive(ExecCtx& ctx, Node x) {
    Node u = x;
    ctx.visit();
    if (ctx.forest->config().finds_help) co_await help_node(ctx, u);
    auto r = co_await aw_read_parent(ctx, u);
    Node v = static_cast<Node>(r.value);
    uint64_t lin = r.stamp;
    while (v != u) {
        u = v;
        ctx.visit();
        if (ctx.forest->config().finds_help) co_await help_node(ctx, u);
        r = co_await aw_read_parent(ctx, u);
        v = static_cast<Node>(r.value);
        lin = r.stamp;
    }
    co_return FindResult{u, lin};
}

OpTask<FindResult> find_one_try(ExecCtx& ctx, Node x) {
    Node u = x;
    ctx.visit();
    if (ctx.forest->config().finds_help) co_await help_node(ctx, u);
    Node v = static_cast<Node>((co_await aw_read_parent(ctx, u)).value);
    auto rw = co_await aw_read_parent(ctx, v);
    Node w = static_cast<Node>(rw.value);
    uint64_t lin = rw.stamp;
    while (v != w) {
        co_await aw_cas_parent(ctx, u, v, w);
        u = v;
        ctx.visit();
        if (ctx.forest->config().finds_help) co_await help_node(ctx, u);
        v = static_cast<Node>((co_await aw_read_parent(ctx, u)).value);
        rw = co_await aw_read_parent(ctx, v);
        w = static_cast<Node>(rw.value);
        lin = rw.stamp;
    }
    co_return FindResult{v, lin};
}

OpTask<FindResult> find_two_try(ExecCtx& ctx, Node x) {
    Node u = x;
    ctx.visit();
    if (ctx.forest->config().finds_help) co_await help_node(ctx, u);
    Node v = static_cast<Node>((co_await aw_read_parent(ctx, u)).value);
    auto rw = co_await aw_read_parent(ctx, v);
    Node w = static_cast<Node>(rw.value);
    uint64_t lin = rw.stamp;
    while (v != w) {
        co_await aw_cas_parent(ctx, u, v, w);
        v = static_cast<Node>((co_await aw_read_parent(ctx, u)).value);
        w = static_cast<Node>((co_await aw_read_parent(ctx, v)).value);
        co_await aw_cas_parent(ctx, u, v, w);
        u = v;
        ctx.visit();
        if (ctx.forest->config().finds_help) co_await help_node(ctx, u);
        v = static_cast<Node>((co_await aw_read_parent(ctx, u)).value);
        rw = co_await aw_read_parent(ctx, v);
        w = static_cast<Node>(rw.value);
        lin = rw.stamp;
    }
    co_return FindResult{v, lin};
}

OpTask<FindResult> find_cond_two_try(ExecCtx& ctx, Node x) {
    Node u = x;
    ctx.visit();
    if (ctx.forest->config().finds_help) co_await help_node(ctx, u);
    Node v = static_cast<Node>((co_await aw_read_parent(ctx, u)).value);
    auto rw = co_await aw_read_parent(ctx, v);
    Node w = static_cast<Node>(rw.value);
    uint64_t lin = rw.stamp;
    while (v != w) {
        auto first = co_await aw_cas_parent(ctx, u, v, w);
        if (!first.ok) {
            v = static_cast<Node>((co_await aw_read_parent(ctx, u)).value);
            w = static_cast<Node>((co_await aw_read_parent(ctx, v)).value);
            co_await aw_cas_parent(ctx, u, v, w);
        }
        u = v;
        ctx.visit();
        if (ctx.forest->config().finds_help) co_await help_node(ctx, u);
        v = static_cast<Node>((co_await aw_read_parent(ctx, u)).value);
        rw = co_await aw_read_parent(ctx, v);
        w = static_cast<Node>(rw.value);
        lin = rw.stamp;
    }
    co_return FindResult{v, lin};
}

OpTask<FindResult> find_op(ExecCtx& ctx, Node x) {
    if (x >= ctx.forest->size()) throw std::invalid_argument("find: node out of range");
    switch (ctx.forest->config().find) {
        case FindRule::naive: co_return co_await find_naive(ctx, x);
        case FindRule::one_try: co_return co_await find_one_try(ctx, x);
        case FindRule::two_try: co_return co_await find_two_try(ctx, x);
        case FindRule::cond_two_try: co_return co_await find_cond_two_try(ctx, x);
    }
    throw std::logic_error("find: bad rule");
}

// ---------------------------------------------------------------------------
// helping protocol
//
// A link first publishes its whole announcement in the owner's descriptor
// word, then claims the child-to-be x by writing the owner's id into x's
// rank word, verifying rank r and no existing claim. From that point anyone
// can (and the owner does) complete the update; each completion step is a
// CAS that verifies the state it replaces, so steps are idempotent across
// helpers. Claims on nodes that became children are never cleared: such a
// tombstone makes every later claim on the node fail, which is what keeps a
// slow helper's leftover CASes harmless.
// ---------------------------------------------------------------------------

namespace {

// Deterministic completion. d is the validated descriptor value of `owner`.
OpTask<bool> complete_det(ExecCtx& ctx, DetDescriptor d) {
    ctx.forest->count_help_step(ctx.proc);
    if (d.equal_ranks) {
        // Equal ranks: x is the smaller index by construction. Install y
        // itself, then raise y's rank unless it moved on.
        co_await aw_cas_parent(ctx, d.x, d.x, d.y);
        auto yw = co_await aw_read_rank(ctx, d.y);
        if (yw.value == pack_rank_proc(d.rank, 0))
            co_await aw_cas_rank(ctx, d.y, yw.value, pack_rank_proc(d.rank + 1, 0));
    } else {
        // y outranked x when announced; its current parent can only have
        // outranked it further. Installing y's parent instead of y keeps the
        // child's new parent strictly higher even if y was just linked away.
        auto z = co_await aw_read_parent(ctx, d.y);
        co_await aw_cas_parent(ctx, d.x, d.x, static_cast<Node>(z.value));
    }
    co_return true;
}

// Randomized completion for a claim (r, owner, seq) observed on x. All CAS
// expectations derive from the claim word, so a stale call resolves to
// no-ops once the claim has been superseded.
OpTask<bool> complete_rand(ExecCtx& ctx, Node x, int owner, uint32_t r, uint16_t seq) {
    const uint64_t claim_word = pack_rank_proc(r, static_cast<uint16_t>(owner), seq);
    for (;;) {
        ctx.forest->count_help_step(ctx.proc);
        auto dres = co_await do_access(ctx, {AccessKind::read_rand_desc, static_cast<Node>(owner)});
        RandDescriptor d = RandDescriptor::unpack(dres.value);
        if (d.rank != r || d.seq != seq) co_return false;  // announcement superseded
        if (d.flag == kFlagNull) {
            RandDescriptor resolved = d;
            resolved.flag = ctx.flip() ? kFlagParentChange : kFlagRankBump;
            co_await do_access(ctx, {AccessKind::cas_rand_desc, static_cast<Node>(owner), 0,
                                     dres.value, resolved.pack()});
            continue;  // re-read; some resolution is in place now
        }
        if (d.flag == kFlagParentChange) {
            co_await aw_cas_parent(ctx, x, x, d.y);
            co_return true;
        }
        // rank bump: releases the claim and leaves x a root
        co_await aw_cas_rank(ctx, x, claim_word, pack_rank_proc(r + 1, 0));
        co_return false;
    }
}

// One helping pass over node x: if a live claim is found, execute its
// owner's pending update. Tombstones (claims on nodes that are already
// children) and stale pairings are left alone.
OpTask<bool> help_impl(ExecCtx& ctx, Node x) {
    auto rw = co_await aw_read_rank(ctx, x);
    const int owner = rp_proc(rw.value);
    if (owner == 0) co_return false;
    auto pw = co_await aw_read_parent(ctx, x);
    if (static_cast<Node>(pw.value) != x) co_return false;  // tombstone on a child

    if (ctx.forest->config().link == LinkRule::rank_dcas) {
        auto dres = co_await do_access(ctx, {AccessKind::read_det_desc, static_cast<Node>(owner)});
        DetDescriptor d = DetDescriptor::unpack(dres.value);
        if (d.x != x || d.rank != rp_rank(rw.value)) co_return false;  // stale
        co_return co_await complete_det(ctx, d);
    }
    co_return co_await complete_rand(ctx, x, owner, rp_rank(rw.value), rp_tag(rw.value));
}

// Deterministic announcement: x is the child-to-be of rank r, y the target.
OpTask<LinkResult> announce_det(ExecCtx& ctx, Node x, Node y, uint32_t r, bool equal) {
    if (r > kMaxHelpingRank) throw std::logic_error("announce: rank exceeds descriptor range");
    DetDescriptor d{x, y, r, equal};
    co_await do_access(ctx, {AccessKind::write_det_desc, 0, 0, 0, d.pack()});
    auto claim = co_await aw_cas_rank(ctx, x, pack_rank_proc(r, 0),
                                      pack_rank_proc(r, static_cast<uint16_t>(ctx.proc)));
    if (!claim.ok) {
        co_await help_impl(ctx, x);
        co_return LinkResult{false, 0, x, y};
    }
    co_await complete_det(ctx, d);
    // The claim succeeded, so the descriptor's install is the one that made
    // x a child; its stamp is this link's linearization.
    uint64_t lin = ctx.logging ? ctx.forest->install_stamp(x) : 0;
    co_return LinkResult{true, lin, x, y};
}

// Randomized announcement: x is the claimed node (the smaller index when the
// ranks tied). The parent-change/rank-bump choice rides in the descriptor:
// decided at announce time, or left null for helpers to settle by CAS when
// the flag-by-CAS variant is on. At the rank cap there is no coin; the link
// always attempts the parent change.
OpTask<LinkResult> announce_rand(ExecCtx& ctx, Node x, Node y, uint32_t r, bool equal) {
    Forest& f = *ctx.forest;
    if (r > kMaxHelpingRank) throw std::logic_error("announce: rank exceeds descriptor range");

    RandDescriptor d;
    d.y = y;
    d.rank = r;
    d.seq = ++ctx.announce_seq;
    if (!equal || r >= f.rank_cap()) {
        d.flag = kFlagParentChange;
    } else if (!f.config().rand_cas_flag) {
        d.flag = ctx.flip() ? kFlagParentChange : kFlagRankBump;
    }  // else left null; the first completion step resolves it

    co_await do_access(ctx, {AccessKind::write_rand_desc, 0, 0, 0, d.pack()});
    auto claim = co_await aw_cas_rank(
        ctx, x, pack_rank_proc(r, 0),
        pack_rank_proc(r, static_cast<uint16_t>(ctx.proc), d.seq));
    if (!claim.ok) {
        co_await help_impl(ctx, x);
        co_return LinkResult{false, 0, x, y};
    }
    const bool parent_changed = co_await complete_rand(ctx, x, ctx.proc, r, d.seq);
    uint64_t lin = (parent_changed && ctx.logging) ? ctx.forest->install_stamp(x) : 0;
    co_return LinkResult{parent_changed, lin, x, y};
}

}  // namespace

OpTask<bool> help_node(ExecCtx& ctx, Node x) { co_return co_await help_impl(ctx, x); }

// ---------------------------------------------------------------------------
// links
// ---------------------------------------------------------------------------

OpTask<LinkResult> link_by_index(ExecCtx& ctx, Node u, Node v) {
    if (u == v) throw std::invalid_argument("link: identical roots");
    ctx.forest->count_link_attempt(ctx.proc);
    Node child = std::min(u, v);
    Node parent = std::max(u, v);
    auto res = co_await aw_cas_parent(ctx, child, child, parent);
    co_return LinkResult{res.ok, res.ok ? res.stamp : 0, child, parent};
}

OpTask<LinkResult> link_by_rank(ExecCtx& ctx, Node u, Node v) {
    if (u == v) throw std::invalid_argument("link: identical roots");
    Forest& f = *ctx.forest;
    ctx.forest->count_link_attempt(ctx.proc);

    const uint32_t r = rp_rank((co_await aw_read_rank(ctx, u)).value);
    const uint32_t s = rp_rank((co_await aw_read_rank(ctx, v)).value);

    if (f.config().rank_impl == RankImpl::native) {
        if (r < s) {
            auto res = co_await do_access(ctx, {AccessKind::cas_parent_rank, u, 0, u, v, r});
            co_return LinkResult{res.ok, res.ok ? res.stamp : 0, u, v};
        }
        if (s < r) {
            auto res = co_await do_access(ctx, {AccessKind::cas_parent_rank, v, 0, v, u, s});
            co_return LinkResult{res.ok, res.ok ? res.stamp : 0, v, u};
        }
        if (f.config().link == LinkRule::rank_dcas) {
            auto res = co_await do_access(ctx, {AccessKind::elink_dcas, u, v, 0, 0, r});
            co_return LinkResult{res.ok, res.ok ? res.stamp : 0, u, v};
        }
        // randomized: act on the smaller index; at the rank cap always try
        // the parent change so the structure keeps making progress.
        Node a = std::min(u, v), b = std::max(u, v);
        if (r >= f.rank_cap() || ctx.flip()) {
            auto res = co_await do_access(ctx, {AccessKind::cas_parent_rank, a, 0, a, b, r});
            co_return LinkResult{res.ok, res.ok ? res.stamp : 0, a, b};
        }
        co_await do_access(ctx, {AccessKind::cas_rank_if_root, a, 0, 0, 0, r});
        co_return LinkResult{false, 0, a, b};
    }

    // helping realization
    if (f.config().link == LinkRule::rank_dcas) {
        if (r < s) co_return co_await announce_det(ctx, u, v, r, false);
        if (s < r) co_return co_await announce_det(ctx, v, u, s, false);
        Node a = std::min(u, v), b = std::max(u, v);
        co_return co_await announce_det(ctx, a, b, r, true);
    }
    if (r < s) co_return co_await announce_rand(ctx, u, v, r, false);
    if (s < r) co_return co_await announce_rand(ctx, v, u, s, false);
    Node a = std::min(u, v), b = std::max(u, v);
    co_return co_await announce_rand(ctx, a, b, r, true);
}

OpTask<LinkResult> link_op(ExecCtx& ctx, Node u, Node v) {
    if (ctx.forest->config().link == LinkRule::index)
        co_return co_await link_by_index(ctx, u, v);
    co_return co_await link_by_rank(ctx, u, v);
}

// ---------------------------------------------------------------------------
// unite / same-set
// ---------------------------------------------------------------------------

OpTask<OpResult> unite_op(ExecCtx& ctx, Node x, Node y) {
    auto fu = co_await find_op(ctx, x);
    auto fv = co_await find_op(ctx, y);
    Node u = fu.root, v = fv.root;
    uint64_t link_lin = 0;
    bool linked = false;
    while (u != v) {
        auto lr = co_await link_op(ctx, u, v);
        if (ctx.logging && lr.linked && !linked) {
            linked = true;
            link_lin = lr.lin;
        }
        fu = co_await find_op(ctx, u);
        fv = co_await find_op(ctx, v);
        u = fu.root;
        v = fv.root;
    }
    // Linearizes at its successful link, or at the equality test that ends
    // the loop (bundled with the last find's final read).
    uint64_t lin = linked ? link_lin : std::max(fu.lin, fv.lin);
    co_return OpResult{u, lin, linked};
}

OpTask<OpResult> same_set_op(ExecCtx& ctx, Node x, Node y) {
    auto fu = co_await find_op(ctx, x);
    auto fv = co_await find_op(ctx, y);
    Node u = fu.root, v = fv.root;
    uint64_t lin = fv.lin;
    while (u != v) {
        ctx.visit();
        auto w = co_await aw_read_parent(ctx, u);
        if (static_cast<Node>(w.value) == u) co_return OpResult{0, lin, false};
        fu = co_await find_op(ctx, u);
        fv = co_await find_op(ctx, v);
        u = fu.root;
        v = fv.root;
        lin = fv.lin;
    }
    co_return OpResult{1, lin, false};
}

OpTask<OpResult> run_op(ExecCtx& ctx, const OpSpec& spec) {
    switch (spec.kind) {
        case OpKind::find: {
            auto r = co_await find_op(ctx, spec.a);
            co_return OpResult{r.root, r.lin, false};
        }
        case OpKind::unite: co_return co_await unite_op(ctx, spec.a, spec.b);
        case OpKind::same_set: co_return co_await same_set_op(ctx, spec.a, spec.b);
    }
    throw std::logic_error("run_op: bad op");
}

OpResult run_op_direct(Forest& forest, int proc, const OpSpec& spec, ExecCtx& ctx) {
    ctx.forest = &forest;
    ctx.proc = proc;
    ctx.stepped = false;
    ctx.reset_for_op();
    auto task = run_op(ctx, spec);
    task.start();
    forest.finish_op(proc, ctx.op_visits);
    return task.value();
}

uint32_t random_index_rank(uint64_t pi_x, uint64_t n) {
    if (n == 0 || pi_x == 0 || pi_x > n)
        throw std::invalid_argument("random_index_rank: position must be in 1..n");
    const auto lg = [](uint64_t v) { return static_cast<uint32_t>(std::bit_width(v) - 1); };
    return lg(n) - lg(n - pi_x + 1);
}

}  // namespace cdsu
