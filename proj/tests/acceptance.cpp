// Acceptance suite: one line per criterion, [PASS]/[FAIL], nonzero exit on
// any failure. Tolerances and grid sizes are fixed here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "cdsu/bench.hpp"
#include "cdsu/scenarios.hpp"

using namespace cdsu;

namespace {

struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> run;
};

std::vector<OpSpec> random_mixed_ops(std::mt19937_64& rng, Node n, size_t count) {
    std::vector<OpSpec> ops;
    for (size_t i = 0; i < count; i++) {
        OpSpec op;
        const auto roll = rng() % 10;
        op.kind = roll < 6 ? OpKind::unite : (roll < 8 ? OpKind::find : OpKind::same_set);
        op.a = static_cast<Node>(rng() % n);
        op.b = static_cast<Node>(rng() % n);
        ops.push_back(op);
    }
    return ops;
}

struct RuleCombo {
    LinkRule link;
    RankImpl impl;
    FindRule find;
};

std::vector<RuleCombo> all_rule_combos() {
    std::vector<RuleCombo> combos;
    for (auto find : {FindRule::naive, FindRule::one_try, FindRule::two_try,
                      FindRule::cond_two_try}) {
        combos.push_back({LinkRule::index, RankImpl::helping, find});
        combos.push_back({LinkRule::rank_dcas, RankImpl::native, find});
        combos.push_back({LinkRule::rank_dcas, RankImpl::helping, find});
        combos.push_back({LinkRule::rank_rand, RankImpl::native, find});
        combos.push_back({LinkRule::rank_rand, RankImpl::helping, find});
    }
    return combos;
}

// Shared by criteria 1 and 3: the random simulated histories and their
// replay results.
struct HistoryBatch {
    uint64_t runs = 0;
    uint64_t partition_failures = 0;
    uint64_t replay_failures = 0;
    std::string first_failure;
    bool done = false;
};
HistoryBatch g_histories;

void run_history_batch() {
    if (g_histories.done) return;
    std::mt19937_64 rng(20240811);
    const auto combos = all_rule_combos();
    const uint64_t per_combo = 10000 / combos.size() + 1;
    for (const auto& combo : combos) {
        for (uint64_t i = 0; i < per_combo; i++) {
            const Node n = 4 + static_cast<Node>(rng() % 13);  // 4..16
            const int p = 2 + static_cast<int>(rng() % 3);     // 2..4
            const size_t m = 4 + rng() % 21;                   // 4..24

            ForestConfig cfg;
            cfg.n = n;
            cfg.link = combo.link;
            cfg.rank_impl = combo.impl;
            cfg.find = combo.find;
            SimOptions opts;
            opts.seed = rng();
            SimRun run(cfg, p, opts);
            std::vector<std::pair<Node, Node>> pairs;
            for (int q = 1; q <= p; q++) {
                auto ops = random_mixed_ops(rng, n, m / p + 1);
                for (const auto& op : ops)
                    if (op.kind == OpKind::unite) pairs.emplace_back(op.a, op.b);
                run.push_program(q, ops);
            }
            run.run(Schedule::random_of(p, rng()));
            g_histories.runs++;

            auto pc = check_partition(run.forest().snapshot(), pairs);
            if (!pc) {
                g_histories.partition_failures++;
                if (g_histories.first_failure.empty())
                    g_histories.first_failure = "partition: " + pc.witness;
            }
            auto rr = replay_linearization(run.records(), n);
            if (!rr) {
                g_histories.replay_failures++;
                if (g_histories.first_failure.empty())
                    g_histories.first_failure = "replay: " + rr.reason;
            }
        }
    }
    g_histories.done = true;
}

bool ac1_partition_equivalence(std::string& detail) {
    run_history_batch();
    std::ostringstream os;
    os << g_histories.runs << " histories, " << g_histories.partition_failures
       << " partition failures";
    if (!g_histories.first_failure.empty()) os << " (" << g_histories.first_failure << ")";
    detail = os.str();
    return g_histories.partition_failures == 0 && g_histories.runs >= 10000;
}

bool ac2_exhaustive_interleavings(std::string& detail) {
    struct ProgramPair {
        std::vector<OpSpec> p1, p2;
    };
    const std::vector<ProgramPair> pairs = {
        {{{OpKind::unite, 0, 1}, {OpKind::unite, 2, 3}},
         {{OpKind::unite, 1, 2}, {OpKind::same_set, 0, 3}}},
        {{{OpKind::unite, 0, 1}, {OpKind::find, 0}},
         {{OpKind::unite, 0, 2}, {OpKind::unite, 1, 3}}},
    };
    uint64_t total = 0, checked_leaves = 0;
    const auto combos = all_rule_combos();
    const uint64_t cap_per_case = 1000000 / (combos.size() * pairs.size());
    bool ok = true;
    std::string first;
    for (const auto& combo : combos) {
        for (const auto& progs : pairs) {
            auto make = [&] {
                ForestConfig cfg;
                cfg.n = 4;
                cfg.link = combo.link;
                cfg.rank_impl = combo.impl;
                cfg.find = combo.find;
                SimOptions opts;
                opts.check_each_step = true;  // acyclicity + order + claims
                auto run = std::make_unique<SimRun>(cfg, 2, opts);
                run->push_program(1, progs.p1);
                run->push_program(2, progs.p2);
                return run;
            };
            std::vector<std::pair<Node, Node>> unite_pairs;
            for (const auto& prog : {progs.p1, progs.p2})
                for (const auto& op : prog)
                    if (op.kind == OpKind::unite) unite_pairs.emplace_back(op.a, op.b);
            try {
                total += for_each_interleaving(make, cap_per_case, [&](SimRun& run) {
                    checked_leaves++;
                    auto pc = check_partition(run.forest().snapshot(), unite_pairs);
                    if (!pc && ok) {
                        ok = false;
                        first = pc.witness;
                    }
                });
            } catch (const std::exception& e) {  // invariant hook violations
                ok = false;
                if (first.empty()) first = e.what();
            }
        }
    }
    std::ostringstream os;
    os << total << " interleavings, " << checked_leaves << " final partitions checked";
    if (!first.empty()) os << " (" << first << ")";
    detail = os.str();
    return ok && total > 100000;
}

bool ac3_linearization_replay(std::string& detail) {
    run_history_batch();
    // constructed negative fixtures must be rejected
    std::vector<OpRecord> early_true(2);
    early_true[0] = {OpKind::same_set, 0, 1, 1, false, 1, 2, 6, 5};
    early_true[1] = {OpKind::unite, 0, 1, 1, true, 2, 3, 12, 10};
    const bool rejects_true = !replay_linearization(early_true, 4).ok;

    std::vector<OpRecord> bad_find(1);
    bad_find[0] = {OpKind::find, 0, 0, 3, false, 1, 2, 6, 4};
    const bool rejects_find = !replay_linearization(bad_find, 4).ok;

    std::vector<OpRecord> dup(2);
    dup[0] = {OpKind::find, 0, 0, 0, false, 1, 2, 8, 5};
    dup[1] = {OpKind::find, 1, 0, 1, false, 2, 3, 9, 5};
    const bool rejects_dup = !replay_linearization(dup, 4).ok;

    std::ostringstream os;
    os << g_histories.runs << " histories replayed, " << g_histories.replay_failures
       << " failures; negative fixtures rejected: " << rejects_true << rejects_find
       << rejects_dup;
    detail = os.str();
    return g_histories.replay_failures == 0 && rejects_true && rejects_find && rejects_dup;
}

bool ac4_rank_dcas_hard_bounds(std::string& detail) {
    const Node n = 1 << 10;
    uint64_t violations = 0;
    uint32_t worst_rank = 0;
    for (uint64_t seed = 1; seed <= 1000; seed++) {
        WorkloadSpec spec;
        spec.n = n;
        spec.m = n;
        spec.p = 4;
        spec.seed = seed;
        ForestConfig cfg;
        cfg.link = LinkRule::rank_dcas;
        cfg.rank_impl = (seed % 2 == 0) ? RankImpl::native : RankImpl::helping;
        cfg.find = FindRule::two_try;
        auto rep = run_sim(spec, cfg, Schedule::random_of(spec.p, seed * 31));
        uint64_t sum = 0;
        for (auto r : rep.snapshot.ranks) sum += r;
        worst_rank = std::max(worst_rank, rep.max_rank);
        if (!rep.verified || sum > n - 1 || rep.max_rank > 10) violations++;
    }
    std::ostringstream os;
    os << "1000 seeded runs, max rank seen " << worst_rank << ", " << violations
       << " violations";
    detail = os.str();
    return violations == 0;
}

bool ac5_randomized_rank_statistics(std::string& detail) {
    const Node n = 1 << 10;
    std::ostringstream os;
    bool ok = true;
    uint32_t worst = 0;
    // uniform unite pairs, and the pairwise-rounds script whose constant
    // rank ties press hardest on the tail bound
    for (auto dist : {PairDist::uniform, PairDist::binomial_script}) {
        std::vector<std::vector<uint32_t>> snapshots;
        for (uint64_t seed = 1; seed <= 100; seed++) {
            WorkloadSpec spec;
            spec.n = n;
            spec.m = 4 * uint64_t{n};
            spec.p = 4;
            spec.seed = seed;
            spec.pairs = dist;
            ForestConfig cfg;
            cfg.link = LinkRule::rank_rand;
            cfg.rank_impl = (seed % 2 == 0) ? RankImpl::native : RankImpl::helping;
            cfg.find = FindRule::two_try;
            auto rep = run_sim(spec, cfg, Schedule::random_of(spec.p, seed * 77));
            if (!rep.verified) {
                detail = "verification failure: " + rep.failure;
                return false;
            }
            snapshots.push_back(rep.snapshot.ranks);
            worst = std::max(worst, rep.max_rank);
        }
        os << to_string(dist) << ":";
        for (uint32_t k : {3u, 5u, 7u}) {
            auto st = check_rank_stats(snapshots, k, n);
            os << " k=" << k << " mean=" << st.mean << "/" << st.bound;
            ok = ok && st.within;
        }
        os << "  ";
    }
    os << "max rank " << worst << " (cap 40), 100 seeds each";
    ok = ok && worst <= 40;
    detail = os.str();
    return ok;
}

// Criteria 6 and 7 share the threaded grid.
struct GridOutcome {
    bool step_bound_ok = true;
    std::string step_bound_detail;
    bool naive_ok = true;
    std::string naive_detail;
    bool ratio_ok = true;
    std::string ratio_detail;
    bool done = false;
};
GridOutcome g_grid;

void run_grid() {
    if (g_grid.done) return;
    const std::vector<Node> ns = {1 << 10, 1 << 14, 1 << 16};
    const std::vector<int> ps = {1, 2, 4, 8, 16};
    const std::vector<uint64_t> m_factors = {1, 4, 16};

    double max_op_bound_ratio = 0;  // max over runs of max_op_visits / (8 lg n)
    double naive_worst = 0;         // max of visits / (8 m lg n)
    double ratio_min = 1e300, ratio_max = 0;
    double ratio_smallest_point = 0, ratio_largest_point = 0;

    for (auto find : {FindRule::naive, FindRule::two_try}) {
        for (Node n : ns) {
            for (int p : ps) {
                for (uint64_t f : m_factors) {
                    WorkloadSpec spec;
                    spec.n = n;
                    spec.m = f * n;
                    spec.p = p;
                    spec.seed = 1000 + f;
                    ForestConfig cfg;
                    cfg.link = LinkRule::rank_dcas;
                    cfg.rank_impl = RankImpl::helping;
                    cfg.find = find;
                    auto rep = run_threads(spec, cfg, false);

                    const double lgn = std::log2(static_cast<double>(n));
                    max_op_bound_ratio = std::max(
                        max_op_bound_ratio,
                        static_cast<double>(rep.totals.max_op_visits) / (8.0 * lgn));
                    if (find == FindRule::naive) {
                        naive_worst = std::max(
                            naive_worst, static_cast<double>(rep.totals.visits) /
                                             (8.0 * static_cast<double>(rep.m) * lgn));
                    } else {
                        const double r = rep.ratio.value_or(0);
                        ratio_min = std::min(ratio_min, r);
                        ratio_max = std::max(ratio_max, r);
                        if (n == ns.front() && p == ps.front() && f == m_factors.front())
                            ratio_smallest_point = r;
                        if (n == ns.back() && p == ps.back() && f == m_factors.back())
                            ratio_largest_point = r;
                    }
                }
            }
        }
    }
    // short supplemental grid so "any find" includes one-try and conditional
    for (auto find : {FindRule::one_try, FindRule::cond_two_try}) {
        for (int p : {1, 4, 16}) {
            for (uint64_t f : {uint64_t{1}, uint64_t{4}}) {
                WorkloadSpec spec;
                spec.n = 1 << 10;
                spec.m = f << 10;
                spec.p = p;
                spec.seed = 77;
                ForestConfig cfg;
                cfg.link = LinkRule::rank_dcas;
                cfg.rank_impl = RankImpl::helping;
                cfg.find = find;
                auto rep = run_threads(spec, cfg, false);
                max_op_bound_ratio =
                    std::max(max_op_bound_ratio,
                             static_cast<double>(rep.totals.max_op_visits) / (8.0 * 10.0));
            }
        }
    }

    {
        std::ostringstream os;
        os << "worst per-op visits at " << max_op_bound_ratio << " of the 8*lg(n) budget";
        g_grid.step_bound_detail = os.str();
        g_grid.step_bound_ok = max_op_bound_ratio <= 1.0;
    }
    {
        std::ostringstream os;
        os << "worst naive grid total at " << naive_worst << " of the 8*m*lg(n) budget";
        g_grid.naive_detail = os.str();
        g_grid.naive_ok = naive_worst <= 1.0;
    }
    {
        std::ostringstream os;
        os << "two-try ratios in [" << ratio_min << ", " << ratio_max << "]; largest point "
           << ratio_largest_point << " vs smallest " << ratio_smallest_point;
        g_grid.ratio_detail = os.str();
        g_grid.ratio_ok =
            ratio_largest_point <= 2.0 * ratio_smallest_point && ratio_max < 1e300;
    }
    g_grid.done = true;
}

bool ac6_step_bound(std::string& detail) {
    run_grid();
    detail = g_grid.step_bound_detail;
    return g_grid.step_bound_ok;
}

bool ac7_work_bounds(std::string& detail) {
    run_grid();
    detail = g_grid.naive_detail + "; " + g_grid.ratio_detail;
    return g_grid.naive_ok && g_grid.ratio_ok;
}

bool ac8_lower_bound_scenarios(std::string& detail) {
    std::ostringstream os;
    bool ok = true;
    for (auto find : {FindRule::one_try, FindRule::two_try, FindRule::cond_two_try}) {
        auto rep = scenario_log_lowerbound(1 << 12, 64, 1 << 14, LinkRule::rank_dcas,
                                           RankImpl::native, find, 5);
        os << to_string(find) << " ratio=" << rep.ratio << " ";
        ok = ok && rep.ratio >= 0.5;
    }
    auto adv = scenario_sqrt_p_path(1 << 12, 64, FindRule::one_try, 7, true);
    auto ind = scenario_sqrt_p_path(1 << 12, 64, FindRule::one_try, 7, false);
    os << "| path: adversary depth " << adv.mean_member_depth << " (need >= 2), independent "
       << ind.mean_member_depth << " (cap 24)";
    ok = ok && adv.mean_member_depth >= 2.0 && ind.mean_member_depth <= 24.0;
    detail = os.str();
    return ok;
}

bool ac9_wakeup(std::string& detail) {
    ForestConfig cfg;
    cfg.link = LinkRule::index;
    cfg.find = FindRule::one_try;
    uint64_t failures = 0;
    for (uint64_t seed = 1; seed <= 1000; seed++) {
        auto res = scenario_wakeup(cfg, 8, Schedule::random_of(8, seed), seed);
        if (!res.at_least_one_true || !res.none_true_before_all_started) failures++;
    }
    std::ostringstream os;
    os << "1000 schedules, " << failures << " property violations";
    detail = os.str();
    return failures == 0;
}

bool ac10_helping_equivalence(std::string& detail) {
    // simulated: all interleavings at n <= 6, 2 processes, both realizations
    struct ProgramPair {
        std::vector<OpSpec> p1, p2;
    };
    const std::vector<ProgramPair> pairs = {
        {{{OpKind::unite, 0, 1}, {OpKind::unite, 3, 4}}, {{OpKind::unite, 1, 2}}},
        {{{OpKind::unite, 0, 1}}, {{OpKind::unite, 0, 2}, {OpKind::unite, 4, 5}}},
    };
    bool ok = true;
    std::string first;
    uint64_t interleavings = 0;
    for (const auto& progs : pairs) {
        std::vector<std::pair<Node, Node>> unite_pairs;
        for (const auto& prog : {progs.p1, progs.p2})
            for (const auto& op : prog) unite_pairs.emplace_back(op.a, op.b);
        const auto expected = partition_of_edges(6, unite_pairs);
        for (auto impl : {RankImpl::native, RankImpl::helping}) {
            auto make = [&] {
                ForestConfig cfg;
                cfg.n = 6;
                cfg.link = LinkRule::rank_dcas;
                cfg.rank_impl = impl;
                cfg.find = FindRule::one_try;
                SimOptions opts;
                opts.check_each_step = true;
                auto run = std::make_unique<SimRun>(cfg, 2, opts);
                run->push_program(1, progs.p1);
                run->push_program(2, progs.p2);
                return run;
            };
            try {
                interleavings += for_each_interleaving(make, 120000, [&](SimRun& run) {
                    auto part = partition_of_parents(run.forest().snapshot().parents);
                    if (!(part == expected) && ok) {
                        ok = false;
                        first = "partition diverged between realizations";
                    }
                });
            } catch (const std::exception& e) {
                ok = false;
                if (first.empty()) first = e.what();
            }
        }
    }

    // threaded stress: CAS-only realization at scale over 50 seeds
    uint64_t stress_failures = 0;
    for (uint64_t seed = 1; seed <= 50; seed++) {
        WorkloadSpec spec;
        spec.n = 1 << 16;
        spec.m = 1 << 20;
        spec.p = 8;
        spec.seed = seed;
        ForestConfig cfg;
        cfg.link = LinkRule::rank_dcas;
        cfg.rank_impl = RankImpl::helping;
        cfg.find = FindRule::two_try;
        auto rep = run_threads(spec, cfg, false);
        // partition against the workload's unite pairs
        auto programs = generate_workload(spec);
        std::vector<std::pair<Node, Node>> up;
        for (const auto& prog : programs)
            for (const auto& op : prog)
                if (op.kind == OpKind::unite) up.emplace_back(op.a, op.b);
        auto pc = check_partition(rep.snapshot, up);
        // rank monotonicity along every edge: parent not below child, ties
        // broken by index (the CAS-only realization's ordering invariant)
        bool mono = true;
        for (Node x = 0; x < spec.n; x++) {
            const Node par = rep.snapshot.parents[x];
            if (par == x) continue;
            const auto rx = rep.snapshot.ranks[x], rp = rep.snapshot.ranks[par];
            if (rp < rx || (rp == rx && par < x)) mono = false;
        }
        uint64_t rank_sum = 0;
        for (auto r : rep.snapshot.ranks) rank_sum += r;
        if (!pc || !mono || rank_sum > spec.n - 1) stress_failures++;
    }

    // one fully verified randomized-linking run at the same scale
    bool rand_verified = true;
    {
        WorkloadSpec spec;
        spec.n = 1 << 16;
        spec.m = 1 << 20;
        spec.p = 8;
        spec.seed = 99;
        ForestConfig cfg;
        cfg.link = LinkRule::rank_rand;
        cfg.rank_impl = RankImpl::helping;
        cfg.find = FindRule::two_try;
        auto rep = run_threads(spec, cfg, true);
        rand_verified = rep.verified;
        if (!rand_verified && first.empty()) first = rep.failure;
    }

    std::ostringstream os;
    os << interleavings << " interleavings across both realizations; threaded stress failures "
       << stress_failures << "/50; randomized verified run: " << (rand_verified ? "ok" : "FAIL");
    if (!first.empty()) os << " (" << first << ")";
    detail = os.str();
    return ok && stress_failures == 0 && rand_verified && interleavings > 1000;
}

bool ac11_scripted_constructions(std::string& detail) {
    std::ostringstream os;
    bool ok = true;
    // binomial heights are exact for every k = 2^j, j <= 10
    for (auto impl : {RankImpl::native, RankImpl::helping}) {
        for (uint32_t j = 0; j <= 10; j++) {
            const Node k = Node(1) << j;
            ForestConfig cfg;
            cfg.n = k;
            cfg.link = LinkRule::rank_dcas;
            cfg.rank_impl = impl;
            cfg.find = FindRule::naive;
            SimRun run(cfg, 1);
            build_binomial_tree(run, k);
            const uint32_t h = height_of(run.forest().snapshot().parents);
            if (h != j) {
                ok = false;
                os << "binomial 2^" << j << " height " << h << "; ";
            }
        }
    }
    // two-try split of an uncontended 12-node path
    {
        ForestConfig cfg;
        cfg.n = 12;
        cfg.link = LinkRule::index;
        cfg.find = FindRule::two_try;
        SimRun run(cfg, 1);
        for (Node i = 0; i + 1 < 12; i++) run.forest().cas_parent(1, i, i, i + 1);
        run.push_op(1, {OpKind::find, 0});
        run.run(Schedule::round_robin_of(1));
        const std::vector<Node> expect{3, 2, 5, 4, 7, 6, 9, 8, 11, 10, 11, 11};
        if (run.forest().snapshot().parents != expect) {
            ok = false;
            os << "two-try split shape mismatch; ";
        }
    }
    // one-try split of an uncontended 8-node path: odds and evens
    {
        ForestConfig cfg;
        cfg.n = 8;
        cfg.link = LinkRule::index;
        cfg.find = FindRule::one_try;
        SimRun run(cfg, 1);
        for (Node i = 0; i + 1 < 8; i++) run.forest().cas_parent(1, i, i, i + 1);
        run.push_op(1, {OpKind::find, 0});
        run.run(Schedule::round_robin_of(1));
        const std::vector<Node> expect{2, 3, 4, 5, 6, 7, 7, 7};
        if (run.forest().snapshot().parents != expect) {
            ok = false;
            os << "one-try split shape mismatch; ";
        }
    }
    if (ok) os << "binomial heights exact for k <= 2^10 (both realizations); path splits exact";
    detail = os.str();
    return ok;
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "oracle partition equivalence over 10^4 random histories", ac1_partition_equivalence},
        {2, "exhaustive two-process interleavings with per-step invariants",
         ac2_exhaustive_interleavings},
        {3, "linearization replay accepts all runs, rejects bad fixtures",
         ac3_linearization_replay},
        {4, "deterministic rank bounds: sum < n, max rank <= lg n", ac4_rank_dcas_hard_bounds},
        {5, "randomized rank tail statistics and max-rank cap", ac5_randomized_rank_statistics},
        {6, "per-operation step bound 8*lg(n) on the grid", ac6_step_bound},
        {7, "work bounds: naive 8*m*lg(n); two-try ratio flat across the grid", ac7_work_bounds},
        {8, "lower-bound scenarios: shadowed logs and the leaked-order path",
         ac8_lower_bound_scenarios},
        {9, "wake-up properties over 1000 random schedules", ac9_wakeup},
        {10, "CAS-only helping matches native DCAS; threaded stress", ac10_helping_equivalence},
        {11, "scripted constructions: binomial heights and split shapes",
         ac11_scripted_constructions},
    };

    int failures = 0;
    for (auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] AC%-2d %-62s (%.1fs) %s\n", ok ? "PASS" : "FAIL", c.id, c.name, secs,
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) failures++;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
