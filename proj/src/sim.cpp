#include "cdsu/sim.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

namespace cdsu {

// ---------------------------------------------------------------------------
// Schedule
// ---------------------------------------------------------------------------

Schedule Schedule::explicit_of(std::vector<int> steps, int procs) {
    Schedule s;
    s.policy = SchedulePolicy::explicit_steps;
    s.steps = std::move(steps);
    s.procs = procs;
    for (int p : s.steps)
        if (p < 1 || p > procs) throw SimError("schedule references unknown process");
    return s;
}

Schedule Schedule::round_robin_of(int procs) {
    Schedule s;
    s.policy = SchedulePolicy::round_robin;
    s.procs = procs;
    return s;
}

Schedule Schedule::lock_step_of(int procs) {
    Schedule s;
    s.policy = SchedulePolicy::lock_step;
    s.procs = procs;
    return s;
}

Schedule Schedule::random_of(int procs, uint64_t seed) {
    Schedule s;
    s.policy = SchedulePolicy::random;
    s.procs = procs;
    s.seed = seed;
    return s;
}

Schedule Schedule::parse(std::istream& in) {
    std::string line;
    Schedule s;
    s.policy = SchedulePolicy::explicit_steps;
    bool have_header = false;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        if (!have_header) {
            std::string kw1, kw2;
            if (!(ls >> kw1)) continue;  // blank line before header
            uint64_t seed = 0;
            int procs = 0;
            if (kw1 != "procs" || !(ls >> procs >> kw2 >> seed) || kw2 != "seed")
                throw SimError("schedule line " + std::to_string(lineno) +
                               ": expected 'procs <p> seed <s>'");
            s.procs = procs;
            s.seed = seed;
            have_header = true;
            continue;
        }
        int proc;
        while (ls >> proc) {
            if (proc < 1 || proc > s.procs)
                throw SimError("schedule line " + std::to_string(lineno) +
                               ": process id out of range");
            s.steps.push_back(proc);
        }
    }
    if (!have_header) throw SimError("schedule: missing 'procs <p> seed <s>' header");
    return s;
}

Schedule Schedule::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SimError("schedule: cannot open " + path);
    return parse(in);
}

void Schedule::dump(std::ostream& out) const {
    out << "procs " << procs << " seed " << seed << "\n";
    for (int p : steps) out << p << "\n";
}

// ---------------------------------------------------------------------------
// StepEvent
// ---------------------------------------------------------------------------

std::string StepEvent::format() const {
    std::ostringstream os;
    os << index << " " << proc << " " << to_string(access.kind) << " ";
    switch (access.kind) {
        case AccessKind::elink_dcas:
        case AccessKind::cas_parent_rank:
            os << access.a << "," << access.b;
            break;
        default:
            os << access.a;
            break;
    }
    os << " ";
    switch (access.kind) {
        case AccessKind::cas_parent:
        case AccessKind::cas_rank_word:
        case AccessKind::cas_rand_desc:
            os << access.expected << " " << access.desired << " ";
            break;
        case AccessKind::write_det_desc:
        case AccessKind::write_rand_desc:
            os << "- " << access.desired << " ";
            break;
        default:
            os << "- - ";
            break;
    }
    switch (access.kind) {
        case AccessKind::read_parent:
        case AccessKind::read_rank_word:
        case AccessKind::read_det_desc:
        case AccessKind::read_rand_desc:
            os << result.value;
            break;
        default:
            os << (result.ok ? "true" : "false");
            break;
    }
    return os.str();
}

void SimRun::dump_trace(const std::vector<StepEvent>& trace, std::ostream& out) {
    for (const auto& e : trace) out << e.format() << "\n";
}

// ---------------------------------------------------------------------------
// SimRun
// ---------------------------------------------------------------------------

SimRun::SimRun(ForestConfig forest_cfg, int procs, SimOptions opts) : opts_(opts) {
    forest_cfg.max_procs = static_cast<uint16_t>(procs);
    forest_cfg.verify = true;          // exact stamps; single-threaded so uncontended
    forest_cfg.record_shadow = true;   // validity checking needs the union forest
    cfg_ = forest_cfg;
    forest_ = std::make_unique<Forest>(cfg_);
    machines_.resize(procs + 1);
    answers_.resize(procs + 1);
    for (int p = 1; p <= procs; p++) {
        auto& m = machines_[p];
        m.proc = p;
        m.ctx.forest = forest_.get();
        m.ctx.proc = p;
        m.ctx.stepped = true;
        m.ctx.logging = true;
        m.ctx.rng.seed(proc_stream_seed(opts_.seed, p));
    }
}

void SimRun::push_op(int proc, OpSpec op) {
    auto& m = machines_.at(proc);
    m.program.push_back(op);
    if (m.status == MachineStatus::done) m.status = MachineStatus::idle;
}

void SimRun::push_program(int proc, const std::vector<OpSpec>& ops) {
    for (const auto& op : ops) push_op(proc, op);
}

void SimRun::inject_flips(int proc, std::vector<uint8_t> flips) {
    auto& m = machines_.at(proc);
    m.injected = std::move(flips);
    m.ctx.injected_flips = &m.injected;
    m.ctx.flip_pos = 0;
}

bool SimRun::runnable(int proc) const {
    const auto& m = machines_.at(proc);
    return m.status == MachineStatus::running || !m.program.empty();
}

bool SimRun::all_done() const {
    for (size_t p = 1; p < machines_.size(); p++)
        if (runnable(static_cast<int>(p))) return false;
    return true;
}

void SimRun::begin_next_op(Machine& m) {
    m.current = m.program.front();
    m.program.pop_front();
    m.ctx.reset_for_op();
    m.invoke_stamp = forest_->clock_now();
    m.task.emplace(run_op(m.ctx, m.current));
    m.task->start();  // runs local computation up to the first access request
    m.status = MachineStatus::running;
    if (m.ctx.finished) {
        finish_op(m);  // rethrows errors raised before the first access
        throw SimError("operation finished without any shared access");
    }
}

void SimRun::finish_op(Machine& m) {
    const OpResult res = m.task->value();  // rethrows algorithm errors
    forest_->finish_op(m.proc, m.ctx.op_visits);
    answers_[m.proc].push_back(res.answer);
    if (opts_.collect_records) {
        OpRecord rec;
        rec.kind = m.current.kind;
        rec.a = m.current.a;
        rec.b = m.current.b;
        rec.answer = res.answer;
        rec.linked = res.linked;
        rec.proc = m.proc;
        rec.invoke_stamp = m.invoke_stamp;
        rec.response_stamp = forest_->clock_now();
        rec.lin_stamp = res.lin;
        records_.push_back(rec);
    }
    m.task.reset();
    if (m.program.empty()) {
        m.status = MachineStatus::done;
        m.done_step = steps_done_;
    } else {
        m.status = MachineStatus::idle;
    }
}

const StepEvent& SimRun::step(int proc) {
    auto& m = machines_.at(proc);
    if (m.status == MachineStatus::done || (m.status == MachineStatus::idle && m.program.empty()))
        throw SimError("step " + std::to_string(steps_done_) + ": process " +
                       std::to_string(proc) + " has no work");
    if (m.status == MachineStatus::idle) begin_next_op(m);

    StepEvent ev;
    ev.index = steps_done_;
    ev.proc = proc;
    ev.access = m.ctx.pending;
    ev.result = perform_access(*forest_, proc, m.ctx.pending);
    m.ctx.result = ev.result;

    steps_done_++;
    if (m.first_step == 0) m.first_step = steps_done_;
    consumed_.push_back(proc);

    m.ctx.leaf.resume();  // bundled local computation, next request or finish
    if (m.ctx.finished) finish_op(m);

    last_event_ = ev;
    if (opts_.collect_trace) trace_.push_back(ev);
    if (opts_.check_each_step) check_invariants();
    return opts_.collect_trace ? trace_.back() : last_event_;
}

void SimRun::run(const Schedule& schedule) {
    switch (schedule.policy) {
        case SchedulePolicy::explicit_steps: {
            for (size_t i = 0; i < schedule.steps.size(); i++) {
                if (all_done())
                    throw SimError("schedule step " + std::to_string(i) +
                                   ": all machines already done");
                step(schedule.steps[i]);
            }
            return;
        }
        case SchedulePolicy::round_robin:
        case SchedulePolicy::lock_step: {
            // One step of each live process per round.
            while (!all_done()) {
                for (int p = 1; p <= procs(); p++)
                    if (runnable(p)) step(p);
            }
            return;
        }
        case SchedulePolicy::random: {
            std::mt19937_64 rng(schedule.seed);
            std::vector<int> live;
            while (!all_done()) {
                live.clear();
                for (int p = 1; p <= procs(); p++)
                    if (runnable(p)) live.push_back(p);
                step(live[rng() % live.size()]);
            }
            return;
        }
        case SchedulePolicy::adversary:
            throw SimError("adversary schedules run via run_with_chooser");
    }
}

void SimRun::run_with_chooser(const std::function<int(SimRun&)>& chooser) {
    while (!all_done()) {
        int p = chooser(*this);
        if (p == 0) return;
        step(p);
    }
}

// ---------------------------------------------------------------------------
// invariants
// ---------------------------------------------------------------------------

void SimRun::check_invariants() const {
    const Node n = forest_->size();
    const auto& f = *forest_;

    // acyclicity: parent chains reach a self-loop within n steps
    for (Node x = 0; x < n; x++) {
        Node cur = x;
        Node steps = 0;
        for (; steps <= n; steps++) {
            Node next = f.parent_unsafe(cur);
            if (next == cur) break;
            cur = next;
        }
        if (steps > n)
            throw InvariantError(steps_done_, "cycle reached from node " + std::to_string(x));
    }

    // per-rule monotonicity along present edges
    for (Node x = 0; x < n; x++) {
        Node p = f.parent_unsafe(x);
        if (p == x) continue;
        switch (cfg_.link) {
            case LinkRule::index:
                if (p < x)
                    throw InvariantError(steps_done_, "index edge " + std::to_string(x) + "->" +
                                                          std::to_string(p) + " goes down");
                break;
            case LinkRule::rank_dcas:
                if (cfg_.rank_impl == RankImpl::native) {
                    if (f.rank_unsafe(p) <= f.rank_unsafe(x))
                        throw InvariantError(steps_done_,
                                             "rank edge " + std::to_string(x) + "->" +
                                                 std::to_string(p) + " not strictly increasing");
                    break;
                }
                [[fallthrough]];  // CAS-only realization: lexicographic order
            case LinkRule::rank_rand: {
                auto rx = f.rank_unsafe(x), rp = f.rank_unsafe(p);
                if (rp < rx || (rp == rx && p < x))
                    throw InvariantError(steps_done_, "edge " + std::to_string(x) + "->" +
                                                          std::to_string(p) +
                                                          " violates (rank, index) order");
                break;
            }
        }
    }

    // deterministic rank linking pays for every rank increment with a link
    if (cfg_.link == LinkRule::rank_dcas) {
        uint64_t rank_sum = 0;
        for (Node x = 0; x < n; x++) rank_sum += f.rank_unsafe(x);
        if (rank_sum > uint64_t{n} - 1)
            throw InvariantError(steps_done_, "sum of ranks " + std::to_string(rank_sum) +
                                                  " exceeds n - 1");
    }

    // live claims point at descriptors that describe them
    if (cfg_.link != LinkRule::index && cfg_.rank_impl == RankImpl::helping) {
        for (Node x = 0; x < n; x++) {
            if (f.parent_unsafe(x) != x) continue;  // tombstones on children are expected
            uint64_t w = f.rank_word_unsafe(x);
            int owner = rp_proc(w);
            if (owner == 0) continue;
            if (cfg_.link == LinkRule::rank_dcas) {
                auto d = DetDescriptor::unpack(f.det_desc_unsafe(owner));
                if (d.x != x && !(d.equal_ranks && d.y == x))
                    throw InvariantError(steps_done_, "claim by " + std::to_string(owner) +
                                                          " on root " + std::to_string(x) +
                                                          " has no matching descriptor");
            } else {
                auto d = RandDescriptor::unpack(f.rand_desc_unsafe(owner));
                if (d.rank != rp_rank(w) || d.seq != rp_tag(w))
                    throw InvariantError(steps_done_, "claim by " + std::to_string(owner) +
                                                          " on root " + std::to_string(x) +
                                                          " has no matching descriptor");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// interleaving enumeration
// ---------------------------------------------------------------------------

namespace {

uint64_t explore(std::vector<int>& prefix, const std::function<std::unique_ptr<SimRun>()>& make,
                 uint64_t cap, uint64_t done, const std::function<void(SimRun&)>& at_leaf) {
    if (done >= cap) return done;
    auto run = make();
    for (int p : prefix) run->step(p);
    if (run->all_done()) {
        at_leaf(*run);
        return done + 1;
    }
    for (int p = 1; p <= run->procs() && done < cap; p++) {
        if (!run->runnable(p)) continue;
        prefix.push_back(p);
        done = explore(prefix, make, cap, done, at_leaf);
        prefix.pop_back();
    }
    return done;
}

}  // namespace

uint64_t for_each_interleaving(const std::function<std::unique_ptr<SimRun>()>& make_run,
                               uint64_t cap, const std::function<void(SimRun&)>& at_leaf) {
    std::vector<int> prefix;
    return explore(prefix, make_run, cap, 0, at_leaf);
}

}  // namespace cdsu
