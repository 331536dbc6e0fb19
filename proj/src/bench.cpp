#include "cdsu/bench.hpp"

#include <barrier>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cdsu/scenarios.hpp"

namespace cdsu {

const char* to_string(PairDist d) {
    switch (d) {
        case PairDist::uniform: return "uniform";
        case PairDist::biased: return "biased";
        case PairDist::binomial_script: return "binomial";
    }
    return "?";
}

std::vector<OpSpec> binomial_unite_script(Node n) {
    std::vector<OpSpec> ops;
    Node pow2 = 1;
    while (pow2 * 2 <= n) pow2 *= 2;
    std::vector<Node> roots(pow2);
    std::iota(roots.begin(), roots.end(), Node{0});
    while (roots.size() > 1) {
        std::vector<Node> next;
        for (size_t i = 0; i + 1 < roots.size(); i += 2) {
            ops.push_back({OpKind::unite, roots[i], roots[i + 1]});
            next.push_back(roots[i + 1]);  // rank linking raises the second root
        }
        roots = std::move(next);
    }
    for (Node x = pow2; x < n; x++) ops.push_back({OpKind::unite, roots.front(), x});
    return ops;
}

std::vector<std::vector<OpSpec>> generate_workload(const WorkloadSpec& spec) {
    if (spec.n == 0 || spec.p < 1) throw std::invalid_argument("workload: bad n or p");
    const double mix_sum = spec.mix_unite + spec.mix_find + spec.mix_same;
    if (std::abs(mix_sum - 1.0) > 1e-9)
        throw std::invalid_argument("workload: mix fractions must sum to 1");

    std::vector<OpSpec> ops;
    ops.reserve(spec.m);
    if (spec.pairs == PairDist::binomial_script) {
        ops = binomial_unite_script(spec.n);
        if (ops.size() > spec.m) ops.resize(spec.m);
    }
    std::mt19937_64 rng(spec.seed);
    auto draw_pair = [&](OpSpec& op) {
        op.a = static_cast<Node>(rng() % spec.n);
        if (spec.pairs == PairDist::biased) {
            // geometric offset: nearby ids tend to share components early
            uint64_t off = 1;
            while ((rng() & 1) && off < spec.n) off++;
            op.b = static_cast<Node>((op.a + off) % spec.n);
        } else {
            op.b = static_cast<Node>(rng() % spec.n);
        }
    };
    while (ops.size() < spec.m) {
        const double roll =
            static_cast<double>(rng()) / static_cast<double>(std::mt19937_64::max());
        OpSpec op;
        if (roll < spec.mix_unite) {
            op.kind = OpKind::unite;
            draw_pair(op);
        } else if (roll < spec.mix_unite + spec.mix_find) {
            op.kind = OpKind::find;
            op.a = static_cast<Node>(rng() % spec.n);
        } else {
            op.kind = OpKind::same_set;
            draw_pair(op);
        }
        ops.push_back(op);
    }

    std::vector<std::vector<OpSpec>> per_proc(spec.p + 1);
    for (size_t i = 0; i < ops.size(); i++) per_proc[1 + (i % spec.p)].push_back(ops[i]);
    return per_proc;
}

std::vector<std::vector<OpSpec>> parse_workload(std::istream& in, int procs) {
    std::vector<std::vector<OpSpec>> per_proc(procs + 1);
    std::string line;
    size_t lineno = 0, dealt = 0;
    while (std::getline(in, line)) {
        lineno++;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        int proc = 0;
        if (tok[0] == '@') {
            proc = std::stoi(tok.substr(1));
            if (proc < 1 || proc > procs)
                throw std::invalid_argument("workload line " + std::to_string(lineno) +
                                            ": process id out of range");
            if (!(ls >> tok))
                throw std::invalid_argument("workload line " + std::to_string(lineno) +
                                            ": missing operation");
        }
        OpSpec op;
        uint64_t a = 0, b = 0;
        if (tok == "U") {
            if (!(ls >> a >> b))
                throw std::invalid_argument("workload line " + std::to_string(lineno) +
                                            ": expected U x y");
            op = {OpKind::unite, static_cast<Node>(a), static_cast<Node>(b)};
        } else if (tok == "F") {
            if (!(ls >> a))
                throw std::invalid_argument("workload line " + std::to_string(lineno) +
                                            ": expected F x");
            op = {OpKind::find, static_cast<Node>(a), 0};
        } else if (tok == "S") {
            if (!(ls >> a >> b))
                throw std::invalid_argument("workload line " + std::to_string(lineno) +
                                            ": expected S x y");
            op = {OpKind::same_set, static_cast<Node>(a), static_cast<Node>(b)};
        } else {
            throw std::invalid_argument("workload line " + std::to_string(lineno) +
                                        ": unknown operation '" + tok + "'");
        }
        if (proc == 0) proc = 1 + static_cast<int>(dealt++ % procs);
        per_proc[proc].push_back(op);
    }
    return per_proc;
}

std::vector<std::vector<OpSpec>> parse_workload_file(const std::string& path, int procs) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("workload: cannot open " + path);
    return parse_workload(in, procs);
}

Splitting splitting_of(FindRule find) {
    switch (find) {
        case FindRule::naive: return Splitting::none;
        case FindRule::one_try: return Splitting::one_try;
        case FindRule::two_try: return Splitting::two_try;
        case FindRule::cond_two_try: return Splitting::conditional_two_try;
    }
    return Splitting::none;
}

namespace {

std::vector<std::pair<Node, Node>> unite_pairs_of(
    const std::vector<std::vector<OpSpec>>& programs) {
    std::vector<std::pair<Node, Node>> pairs;
    for (const auto& prog : programs)
        for (const auto& op : prog)
            if (op.kind == OpKind::unite) pairs.emplace_back(op.a, op.b);
    return pairs;
}

uint64_t count_ops(const std::vector<std::vector<OpSpec>>& programs) {
    uint64_t m = 0;
    for (const auto& prog : programs) m += prog.size();
    return m;
}

void validate_programs(const std::vector<std::vector<OpSpec>>& programs, Node n) {
    for (const auto& prog : programs)
        for (const auto& op : prog)
            if (op.a >= n || (op.kind != OpKind::find && op.b >= n))
                throw std::invalid_argument("workload references node outside [0, n)");
}

void finalize_report(RunReport& rep, Forest& forest) {
    rep.totals = forest.totals();
    rep.snapshot = forest.snapshot();
    rep.max_rank = 0;
    for (uint32_t r : rep.snapshot.ranks) rep.max_rank = std::max(rep.max_rank, r);
    rep.forest_height = height_of(rep.snapshot.parents);
    const Splitting split = splitting_of(forest.config().find);
    if (split != Splitting::none && rep.m > 0) {
        WorkBoundParams params{rep.n, rep.m, static_cast<uint64_t>(rep.p), split};
        rep.ratio = static_cast<double>(rep.totals.visits) / work_bound(params);
    }
}

}  // namespace

RunReport run_threads(const WorkloadSpec& spec, ForestConfig cfg, bool verify) {
    auto programs = generate_workload(spec);
    validate_programs(programs, spec.n);
    cfg.n = spec.n;
    cfg.max_procs = static_cast<uint16_t>(spec.p);
    cfg.verify = verify;
    cfg.record_shadow = verify;
    if (cfg.link != LinkRule::index && cfg.rank_impl == RankImpl::native)
        throw std::invalid_argument(
            "run_threads: native rank linking is simulator-only; use the helping realization");

    Forest forest(cfg);
    std::vector<std::vector<OpRecord>> records(spec.p + 1);
    std::barrier start(spec.p);

    const auto t0 = std::chrono::steady_clock::now();
    {
        std::vector<std::jthread> workers;
        workers.reserve(spec.p);
        for (int q = 1; q <= spec.p; q++) {
            workers.emplace_back([&, q] {
                ExecCtx ctx;
                ctx.rng.seed(proc_stream_seed(spec.seed, q));
                ctx.logging = verify;
                start.arrive_and_wait();
                auto& log = records[q];
                for (const auto& op : programs[q]) {
                    const uint64_t invoke = verify ? forest.clock_now() : 0;
                    OpResult res = run_op_direct(forest, q, op, ctx);
                    if (verify) {
                        OpRecord rec;
                        rec.kind = op.kind;
                        rec.a = op.a;
                        rec.b = op.b;
                        rec.answer = res.answer;
                        rec.linked = res.linked;
                        rec.proc = q;
                        rec.invoke_stamp = invoke;
                        rec.response_stamp = forest.clock_now();
                        rec.lin_stamp = res.lin;
                        log.push_back(rec);
                    }
                }
            });
        }
    }
    const auto t1 = std::chrono::steady_clock::now();

    RunReport rep;
    rep.n = spec.n;
    rep.m = count_ops(programs);
    rep.p = spec.p;
    rep.link = cfg.link;
    rep.find = cfg.find;
    rep.seed = spec.seed;
    rep.mode = "threads";
    rep.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    finalize_report(rep, forest);

    if (verify) {
        auto pairs = unite_pairs_of(programs);
        if (auto pc = check_partition(rep.snapshot, pairs); !pc) {
            rep.verified = false;
            rep.failure = "partition: " + pc.witness;
        }
        std::vector<OpRecord> all;
        for (auto& r : records) all.insert(all.end(), r.begin(), r.end());
        if (auto rr = replay_linearization(all, spec.n); !rr) {
            rep.verified = false;
            rep.failure += (rep.failure.empty() ? "" : "; ") + ("replay: " + rr.reason);
        }
    }
    return rep;
}

RunReport run_sim(const WorkloadSpec& spec, ForestConfig cfg, const Schedule& schedule,
                  const std::vector<std::vector<OpSpec>>* programs_in) {
    auto programs = programs_in ? *programs_in : generate_workload(spec);
    validate_programs(programs, spec.n);
    cfg.n = spec.n;
    SimOptions opts;
    opts.seed = spec.seed;
    SimRun run(cfg, spec.p, opts);
    for (int q = 1; q <= spec.p; q++) run.push_program(q, programs[q]);
    const auto t0 = std::chrono::steady_clock::now();
    run.run(schedule);
    const auto t1 = std::chrono::steady_clock::now();

    RunReport rep;
    rep.n = spec.n;
    rep.m = count_ops(programs);
    rep.p = spec.p;
    rep.link = cfg.link;
    rep.find = cfg.find;
    rep.seed = spec.seed;
    rep.mode = "sim";
    rep.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    finalize_report(rep, run.forest());

    auto pairs = unite_pairs_of(programs);
    if (auto pc = check_partition(rep.snapshot, pairs); !pc) {
        rep.verified = false;
        rep.failure = "partition: " + pc.witness;
    }
    if (auto rr = replay_linearization(run.records(), spec.n); !rr) {
        rep.verified = false;
        rep.failure += (rep.failure.empty() ? "" : "; ") + ("replay: " + rr.reason);
    }
    try {
        run.check_invariants();
    } catch (const std::exception& e) {
        rep.verified = false;
        rep.failure += (rep.failure.empty() ? "" : "; ") + std::string(e.what());
    }
    return rep;
}

void emit_csv(std::span<const RunReport> reports, std::ostream& out, bool header) {
    if (header)
        out << "n,m,p,link,find,seed,mode,total_visits,total_cas,cas_failures,max_rank,wall_ms,"
               "ratio\n";
    for (const auto& r : reports) {
        out << r.n << "," << r.m << "," << r.p << "," << to_string(r.link) << ","
            << to_string(r.find) << "," << r.seed << "," << r.mode << "," << r.totals.visits
            << "," << r.totals.cas_attempts << "," << r.totals.cas_failures << "," << r.max_rank
            << "," << r.wall_ms << ",";
        if (r.ratio) out << *r.ratio;
        out << "\n";
    }
}

void emit_csv(std::span<const RunReport> reports, const std::string& path, bool append) {
    const bool exists = append && [&] {
        std::ifstream probe(path);
        return probe.good() && probe.peek() != std::ifstream::traits_type::eof();
    }();
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    if (!out) throw std::invalid_argument("csv: cannot open " + path);
    emit_csv(reports, out, !exists);
}

}  // namespace cdsu
