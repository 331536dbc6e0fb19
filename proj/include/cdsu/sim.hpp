#pragma once

#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cdsu/algorithms.hpp"

// Deterministic step-level execution. Every operation runs as a resumable
// machine; a schedule names which process moves next; one step is exactly
// one shared-memory access plus the local computation it feeds. Replaying
// the same schedule, seeds and programs is bit-identical.

namespace cdsu {

enum class SchedulePolicy { explicit_steps, round_robin, lock_step, random, adversary };

struct Schedule {
    SchedulePolicy policy = SchedulePolicy::round_robin;
    std::vector<int> steps;  // used by explicit_steps
    uint64_t seed = 0;       // used by random
    int procs = 0;

    static Schedule explicit_of(std::vector<int> steps, int procs);
    static Schedule round_robin_of(int procs);
    static Schedule lock_step_of(int procs);
    static Schedule random_of(int procs, uint64_t seed);

    // Line format: header "procs <p> seed <s>", then one process id per
    // line; '#' starts a comment.
    static Schedule parse(std::istream& in);
    static Schedule parse_file(const std::string& path);
    void dump(std::ostream& out) const;
};

struct StepEvent {
    uint64_t index = 0;
    int proc = 0;
    Access access{};
    AccessResult result{};

    std::string format() const;  // "<idx> <proc> <kind> <nodes> <expected> <new> <outcome>"
};

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvariantError : std::runtime_error {
    uint64_t step;
    InvariantError(uint64_t s, const std::string& what)
        : std::runtime_error("step " + std::to_string(s) + ": " + what), step(s) {}
};

enum class MachineStatus { idle, running, done };

struct SimOptions {
    uint64_t seed = 1;
    bool collect_trace = false;
    bool collect_records = true;
    // Run the structural invariant checks after every step. Quadratic in n
    // per step; intended for small instances.
    bool check_each_step = false;
};

class SimRun {
public:
    // The forest config is adjusted for simulation: verify on (exact stamps;
    // the run is single-threaded so the serialization lock never contends).
    SimRun(ForestConfig forest_cfg, int procs, SimOptions opts = {});

    // Queue an operation on a process (1-based).
    void push_op(int proc, OpSpec op);
    void push_program(int proc, const std::vector<OpSpec>& ops);

    // Inject a fixed coin sequence for a process (replayable randomness).
    void inject_flips(int proc, std::vector<uint8_t> flips);

    // One step of `proc`. Throws SimError if that machine is done and has no
    // queued work.
    const StepEvent& step(int proc);

    bool runnable(int proc) const;
    bool all_done() const;
    int procs() const { return static_cast<int>(machines_.size()) - 1; }
    uint64_t steps_done() const { return steps_done_; }

    // Drive to completion (or schedule exhaustion for explicit schedules).
    void run(const Schedule& schedule);
    // Adversary interface: the chooser sees the whole run and names the next
    // process; return 0 to stop.
    void run_with_chooser(const std::function<int(SimRun&)>& chooser);

    Forest& forest() { return *forest_; }
    const std::vector<StepEvent>& trace() const { return trace_; }
    const std::vector<OpRecord>& records() const { return records_; }
    const std::vector<int>& consumed_schedule() const { return consumed_; }
    const std::vector<uint64_t>& op_answers(int proc) const { return answers_[proc]; }

    MachineStatus status(int proc) const { return machines_[proc].status; }
    uint64_t first_step_of(int proc) const { return machines_[proc].first_step; }
    uint64_t done_step_of(int proc) const { return machines_[proc].done_step; }

    // Structural invariants for the configured rules; throws InvariantError.
    void check_invariants() const;

    static void dump_trace(const std::vector<StepEvent>& trace, std::ostream& out);

private:
    struct Machine {
        int proc = 0;
        MachineStatus status = MachineStatus::idle;
        std::deque<OpSpec> program;
        ExecCtx ctx;
        std::optional<OpTask<OpResult>> task;
        OpSpec current{};
        std::vector<uint8_t> injected;
        uint64_t invoke_stamp = 0;
        uint64_t first_step = 0;  // 1 + index of this machine's first step
        uint64_t done_step = 0;   // 1 + index of the step that finished the program
    };

    void begin_next_op(Machine& m);
    void finish_op(Machine& m);

    ForestConfig cfg_;
    SimOptions opts_;
    std::unique_ptr<Forest> forest_;
    std::vector<Machine> machines_;
    std::vector<StepEvent> trace_;
    StepEvent last_event_{};
    std::vector<OpRecord> records_;
    std::vector<std::vector<uint64_t>> answers_;
    std::vector<int> consumed_;
    uint64_t steps_done_ = 0;
};

// Depth-first enumeration of process interleavings. `make_run` builds a
// fresh run with its programs queued; each explored schedule prefix is
// replayed from scratch (machine state cannot be rolled back). `at_leaf` is
// called on every completed run, at most `cap` times; returns the number of
// complete interleavings visited.
uint64_t for_each_interleaving(const std::function<std::unique_ptr<SimRun>()>& make_run,
                               uint64_t cap, const std::function<void(SimRun&)>& at_leaf);

}  // namespace cdsu
