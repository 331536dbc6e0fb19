#pragma once

#include <stdexcept>

#include "cdsu/exec.hpp"
#include "cdsu/records.hpp"

// The set operations. Each is a coroutine performing one shared access per
// await; visits are counted once per find-loop iteration (including the
// reads before the loop), matching the work accounting used by the bounds.

namespace cdsu {

// ---------------------------------------------------------------------------
// access shorthands
// ---------------------------------------------------------------------------

inline AccessAwaiter aw_read_parent(ExecCtx& c, Node x) {
    return do_access(c, {AccessKind::read_parent, x});
}
inline AccessAwaiter aw_read_rank(ExecCtx& c, Node x) {
    return do_access(c, {AccessKind::read_rank_word, x});
}
inline AccessAwaiter aw_cas_parent(ExecCtx& c, Node x, Node expected, Node desired) {
    return do_access(c, {AccessKind::cas_parent, x, 0, expected, desired});
}
inline AccessAwaiter aw_cas_rank(ExecCtx& c, Node x, uint64_t expected, uint64_t desired) {
    return do_access(c, {AccessKind::cas_rank_word, x, 0, expected, desired});
}

// ---------------------------------------------------------------------------
// finds
// ---------------------------------------------------------------------------

OpTask<FindResult> find_naive(ExecCtx& ctx, Node x);
OpTask<FindResult> find_one_try(ExecCtx& ctx, Node x);
OpTask<FindResult> find_two_try(ExecCtx& ctx, Node x);
OpTask<FindResult> find_cond_two_try(ExecCtx& ctx, Node x);

// Dispatch on the forest's configured compaction rule.
OpTask<FindResult> find_op(ExecCtx& ctx, Node x);

// ---------------------------------------------------------------------------
// links. Single-attempt contract: each call makes one linking attempt (plus
// any helping that attempt requires) and returns; retrying is unite's job.
// ---------------------------------------------------------------------------

OpTask<LinkResult> link_by_index(ExecCtx& ctx, Node u, Node v);
OpTask<LinkResult> link_by_rank(ExecCtx& ctx, Node u, Node v);
OpTask<LinkResult> link_op(ExecCtx& ctx, Node u, Node v);

// Helping protocol entry point: executes the pending update of whichever
// process has claimed `x`, if any. Also used internally before giving up on
// a failed claim.
OpTask<bool> help_node(ExecCtx& ctx, Node x);

// ---------------------------------------------------------------------------
// user-facing operations
// ---------------------------------------------------------------------------

OpTask<OpResult> unite_op(ExecCtx& ctx, Node x, Node y);
OpTask<OpResult> same_set_op(ExecCtx& ctx, Node x, Node y);
OpTask<OpResult> run_op(ExecCtx& ctx, const OpSpec& spec);

// Run one operation to completion on the calling thread and return its
// result (real-thread mode).
OpResult run_op_direct(Forest& forest, int proc, const OpSpec& spec, ExecCtx& ctx);

// Analysis-only rank of a node under random-index linking: position pi_x
// (1-based) in a random permutation of n nodes maps to
// floor(lg n) - floor(lg(n - pi_x + 1)).
uint32_t random_index_rank(uint64_t pi_x, uint64_t n);

}  // namespace cdsu
