#pragma once

#include <coroutine>
#include <cstdint>
#include <exception>
#include <random>
#include <utility>
#include <vector>

#include "cdsu/forest.hpp"

// Operations are written once, as coroutines that request every shared
// access through their ExecCtx. Run directly (real threads), each request is
// satisfied inline against the forest's atomics and the coroutine never
// suspends. Run under the simulator, each request suspends the whole
// coroutine stack and the scheduler performs exactly one access per step.

namespace cdsu {

enum class AccessKind : uint8_t {
    read_parent,
    read_rank_word,
    cas_parent,
    cas_rank_word,
    read_det_desc,
    read_rand_desc,
    write_det_desc,
    write_rand_desc,
    cas_rand_desc,
    elink_dcas,
    cas_parent_rank,
    cas_rank_if_root,
    none,
};

const char* to_string(AccessKind k);

struct Access {
    AccessKind kind = AccessKind::none;
    Node a = 0;        // primary node, or descriptor owner for descriptor kinds
    Node b = 0;        // secondary node where applicable
    uint64_t expected = 0;
    uint64_t desired = 0;
    uint32_t rank = 0;  // rank operand of the native multi-word kinds
};

// Performs one access against the forest on behalf of `proc`. The single
// semantic entry point used by direct execution and by the simulator.
AccessResult perform_access(Forest& forest, int proc, const Access& a);

// Seed of a process's private random stream, derived from the run seed.
// Shared by the threaded runner and the simulator so that a one-process
// workload behaves identically under both. (splitmix64 of seed and proc.)
inline uint64_t proc_stream_seed(uint64_t run_seed, int proc) {
    uint64_t z = run_seed + 0x9e3779b97f4a7c15ull * static_cast<uint64_t>(proc + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

struct ExecCtx {
    Forest* forest = nullptr;
    int proc = 1;

    // stepped == false: accesses are performed inline (real-thread mode).
    // stepped == true: the awaiter parks the request here and suspends; the
    // simulator performs it and resumes `leaf` with `result` filled in.
    bool stepped = false;
    Access pending{};
    AccessResult result{};
    std::coroutine_handle<> leaf{};
    bool finished = false;

    bool logging = false;     // collect linearization data
    uint64_t op_visits = 0;   // visits of the operation currently running
    uint16_t announce_seq = 0;  // randomized-link announcement counter

    std::mt19937_64 rng{0};
    const std::vector<uint8_t>* injected_flips = nullptr;
    size_t flip_pos = 0;

    void reset_for_op() {
        finished = false;
        op_visits = 0;
        leaf = {};
        pending = Access{};
    }

    // Fair coin. Drawn from the injected sequence when one is set (simulator
    // replay), otherwise from this process's seeded stream.
    bool flip() {
        if (injected_flips && flip_pos < injected_flips->size())
            return (*injected_flips)[flip_pos++] != 0;
        return (rng() & 1) != 0;
    }

    void visit() {
        op_visits++;
        forest->count_visit(proc);
    }
};

// ---------------------------------------------------------------------------
// OpTask: a resumable operation (or sub-operation). Starts suspended; nested
// awaits transfer control symmetrically, so the innermost frame is always
// the one the simulator resumes.
// ---------------------------------------------------------------------------

template <typename T>
class OpTask {
public:
    struct promise_type {
        ExecCtx* ctx;
        T value{};
        std::coroutine_handle<> continuation{};
        std::exception_ptr error{};

        // Coroutine parameter preview: every operation coroutine takes its
        // ExecCtx& first, which is how the promise learns its context.
        template <typename... Args>
        explicit promise_type(ExecCtx& c, Args&&...) : ctx(&c) {}

        OpTask get_return_object() {
            return OpTask{std::coroutine_handle<promise_type>::from_promise(*this)};
        }
        std::suspend_always initial_suspend() noexcept { return {}; }

        struct FinalAwaiter {
            bool await_ready() noexcept { return false; }
            std::coroutine_handle<> await_suspend(
                std::coroutine_handle<promise_type> h) noexcept {
                auto& p = h.promise();
                if (p.continuation) {
                    if (p.ctx->stepped) p.ctx->leaf = p.continuation;
                    return p.continuation;
                }
                p.ctx->finished = true;
                return std::noop_coroutine();
            }
            void await_resume() noexcept {}
        };
        FinalAwaiter final_suspend() noexcept { return {}; }

        void return_value(T v) { value = std::move(v); }
        void unhandled_exception() { error = std::current_exception(); }
    };

    OpTask() = default;
    explicit OpTask(std::coroutine_handle<promise_type> h) : h_(h) {}
    OpTask(OpTask&& o) noexcept : h_(std::exchange(o.h_, nullptr)) {}
    OpTask& operator=(OpTask&& o) noexcept {
        if (this != &o) {
            if (h_) h_.destroy();
            h_ = std::exchange(o.h_, nullptr);
        }
        return *this;
    }
    OpTask(const OpTask&) = delete;
    OpTask& operator=(const OpTask&) = delete;
    ~OpTask() {
        if (h_) h_.destroy();
    }

    // Begin execution: runs until the first access request (simulator) or to
    // completion (direct mode).
    void start() { h_.resume(); }
    bool done() const { return h_.done(); }

    const T& value() const {
        if (h_.promise().error) std::rethrow_exception(h_.promise().error);
        return h_.promise().value;
    }

    struct Awaiter {
        std::coroutine_handle<promise_type> inner;
        bool await_ready() { return false; }
        std::coroutine_handle<> await_suspend(std::coroutine_handle<> outer) {
            inner.promise().continuation = outer;
            return inner;
        }
        T await_resume() {
            if (inner.promise().error) std::rethrow_exception(inner.promise().error);
            return std::move(inner.promise().value);
        }
    };
    Awaiter operator co_await() && { return {h_}; }
    Awaiter operator co_await() & { return {h_}; }

private:
    std::coroutine_handle<promise_type> h_{};
};

// Awaitable for one shared access.
struct AccessAwaiter {
    ExecCtx* ctx;
    Access access;

    bool await_ready() {
        if (ctx->stepped) return false;
        ctx->result = perform_access(*ctx->forest, ctx->proc, access);
        return true;
    }
    void await_suspend(std::coroutine_handle<> h) {
        ctx->pending = access;
        ctx->leaf = h;
    }
    AccessResult await_resume() { return ctx->result; }
};

inline AccessAwaiter do_access(ExecCtx& ctx, Access a) { return AccessAwaiter{&ctx, a}; }

}  // namespace cdsu
