#include "cdsu/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace cdsu {

uint32_t depth_in(const std::vector<Node>& parents, Node x) {
    uint32_t d = 0;
    Node u = x;
    while (parents[u] != u) {
        u = parents[u];
        if (++d > parents.size()) throw std::invalid_argument("depth_in: cycle");
    }
    return d;
}

uint32_t height_of(const std::vector<Node>& parents) {
    uint32_t h = 0;
    for (Node x = 0; x < parents.size(); x++) h = std::max(h, depth_in(parents, x));
    return h;
}

namespace {

void run_single_proc(SimRun& run) {
    while (run.runnable(1)) run.step(1);
}

}  // namespace

Node build_binomial_tree(SimRun& run, Node k) {
    if (k == 0 || k > run.forest().size())
        throw std::invalid_argument("binomial builder: k out of range");
    Node pow2 = 1;
    while (pow2 * 2 <= k) pow2 *= 2;

    std::vector<Node> roots(pow2);
    std::iota(roots.begin(), roots.end(), Node{0});
    while (roots.size() > 1) {
        for (size_t i = 0; i + 1 < roots.size(); i += 2)
            run.push_op(1, {OpKind::unite, roots[i], roots[i + 1]});
        run_single_proc(run);  // the round completes before the next begins
        std::vector<Node> survivors;
        for (Node r : roots)
            if (run.forest().parent_unsafe(r) == r) survivors.push_back(r);
        roots = std::move(survivors);
    }
    const Node root = roots.front();
    for (Node x = pow2; x < k; x++) {
        run.push_op(1, {OpKind::unite, root, x});
        run_single_proc(run);
    }
    return root;
}

RandomIndexTree build_random_index_tree(SimRun& run, Node k, uint64_t seed) {
    if (run.forest().config().link != LinkRule::index)
        throw std::invalid_argument("random index builder: requires index linking");
    const Node n = run.forest().size();
    if (k == 0 || k > n) throw std::invalid_argument("random index builder: k out of range");
    Node pow2 = 1;
    while (pow2 * 2 <= k) pow2 *= 2;

    RandomIndexTree out;
    // The node ids ARE the random order index linking consumes, so drawing
    // random ids for the tree slots is the random permutation.
    std::vector<Node> ids(n);
    std::iota(ids.begin(), ids.end(), Node{0});
    std::mt19937_64 rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(pow2);
    out.members = ids;

    struct Tree {
        Node designated;
        std::vector<Node> members;
    };
    std::vector<Tree> trees;
    trees.reserve(pow2);
    for (Node id : ids) trees.push_back({id, {id}});

    std::vector<Node> round0;
    for (const auto& t : trees) round0.push_back(t.designated);
    out.designated.push_back(std::move(round0));

    while (trees.size() > 1) {
        std::vector<Tree> next;
        for (size_t i = 0; i + 1 < trees.size(); i += 2) {
            Tree& a = trees[i];
            Tree& b = trees[i + 1];
            run.push_op(1, {OpKind::unite, a.designated, b.designated});
            run_single_proc(run);
            const Node new_root = static_cast<Node>(run.op_answers(1).back());
            const bool a_won =
                std::find(a.members.begin(), a.members.end(), new_root) != a.members.end();
            Tree merged;
            merged.designated = a_won ? a.designated : b.designated;
            merged.members = std::move(a.members);
            merged.members.insert(merged.members.end(), b.members.begin(), b.members.end());
            next.push_back(std::move(merged));
        }
        trees = std::move(next);
        std::vector<Node> round;
        for (const auto& t : trees) round.push_back(t.designated);
        out.designated.push_back(std::move(round));
    }
    out.root = static_cast<Node>(run.op_answers(1).back());
    return out;
}

// ---------------------------------------------------------------------------

WakeupResult scenario_wakeup(const ForestConfig& cfg, int k, const Schedule& schedule,
                             uint64_t sim_seed) {
    if (k < 1) throw std::invalid_argument("wakeup: need at least one process");
    ForestConfig fc = cfg;
    fc.n = static_cast<Node>(k + 1);
    SimOptions opts;
    opts.seed = sim_seed;
    SimRun run(fc, k, opts);
    for (int j = 1; j <= k; j++) {
        run.push_op(j, {OpKind::unite, static_cast<Node>(j - 1), static_cast<Node>(j)});
        run.push_op(j, {OpKind::find, 0});
        run.push_op(j, {OpKind::find, static_cast<Node>(k)});
    }
    run.run(schedule);

    WakeupResult res;
    res.returned_true.assign(k + 1, false);
    uint64_t latest_first_step = 0;
    for (int j = 1; j <= k; j++)
        latest_first_step = std::max(latest_first_step, run.first_step_of(j));
    res.none_true_before_all_started = true;
    for (int j = 1; j <= k; j++) {
        const auto& answers = run.op_answers(j);
        const bool t = answers.size() >= 3 && answers[1] == answers[2];
        res.returned_true[j] = t;
        if (t) {
            res.at_least_one_true = true;
            if (run.done_step_of(j) < latest_first_step) res.none_true_before_all_started = false;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------

PathScenarioReport scenario_sqrt_p_path(Node n, int p, FindRule find, uint64_t seed,
                                        bool adversary) {
    const Node s = static_cast<Node>(std::floor(std::sqrt(static_cast<double>(p))));
    if (s < 2 || s > n) throw std::invalid_argument("path scenario: sqrt(p) out of range");
    const int builders = p / 2;
    const int finders = p - builders;

    std::mt19937_64 rng(seed);
    std::vector<Node> ids(n);
    std::iota(ids.begin(), ids.end(), Node{0});
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<Node> members(ids.begin(), ids.begin() + s);

    // all unordered pairs, shuffled, dealt to builder processes
    std::vector<std::pair<Node, Node>> pairs;
    for (size_t i = 0; i < members.size(); i++)
        for (size_t j = i + 1; j < members.size(); j++) pairs.emplace_back(members[i], members[j]);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    if (pairs.size() > static_cast<size_t>(builders))
        throw std::invalid_argument("path scenario: not enough builder processes for all pairs");

    ForestConfig fc;
    fc.n = n;
    fc.link = LinkRule::index;
    fc.find = find;
    SimOptions opts;
    opts.seed = seed;
    SimRun run(fc, p, opts);
    for (size_t i = 0; i < pairs.size(); i++)
        run.push_op(static_cast<int>(i + 1), {OpKind::unite, pairs[i].first, pairs[i].second});

    std::vector<Node> sorted_members = members;
    std::sort(sorted_members.begin(), sorted_members.end());

    if (adversary) {
        // The scheduler looks at the random ids and completes exactly the
        // adjacent unites in ascending order, so links form one linear path.
        for (size_t t = 0; t + 1 < sorted_members.size(); t++) {
            const Node a = sorted_members[t], b = sorted_members[t + 1];
            int holder = 0;
            for (size_t i = 0; i < pairs.size(); i++) {
                if ((pairs[i].first == a && pairs[i].second == b) ||
                    (pairs[i].first == b && pairs[i].second == a)) {
                    holder = static_cast<int>(i + 1);
                    break;
                }
            }
            while (run.runnable(holder)) run.step(holder);
        }
    } else {
        // Independence-respecting order: fixed before the ids were drawn.
        for (size_t i = 0; i < pairs.size(); i++) {
            const int holder = static_cast<int>(i + 1);
            while (run.runnable(holder)) run.step(holder);
        }
    }

    PathScenarioReport rep;
    rep.s = s;
    {
        auto snap = run.forest().snapshot();
        uint64_t depth_sum = 0;
        for (Node x : members) {
            const uint32_t d = depth_in(snap.parents, x);
            rep.max_depth = std::max(rep.max_depth, d);
            depth_sum += d;
        }
        rep.mean_member_depth = static_cast<double>(depth_sum) / members.size();
    }

    // measurement wave: the other processes find random members, lock-step
    const uint64_t visits_before = run.forest().totals().visits;
    for (int q = 1; q <= finders; q++) {
        const int proc = builders + q;
        run.push_op(proc, {OpKind::find, members[rng() % members.size()]});
    }
    while (true) {
        bool moved = false;
        for (int q = 1; q <= finders; q++) {
            const int proc = builders + q;
            if (run.runnable(proc)) {
                run.step(proc);
                moved = true;
            }
        }
        if (!moved) break;
    }
    const uint64_t find_visits = run.forest().totals().visits - visits_before;
    rep.mean_find_visits = static_cast<double>(find_visits) / finders;

    // leftover builders (non-adjacent pairs under the adversary) finish now
    Schedule rest = Schedule::round_robin_of(p);
    run.run(rest);

    auto totals = run.forest().totals();
    rep.total_visits = totals.visits;
    rep.total_steps = totals.total_steps();
    return rep;
}

// ---------------------------------------------------------------------------

LowerBoundReport scenario_log_lowerbound(Node n, int p, uint64_t m, LinkRule link,
                                         RankImpl rank_impl, FindRule find, uint64_t seed) {
    LowerBoundReport rep;
    if (m == 0 || p < 1) throw std::invalid_argument("lower bound scenario: bad parameters");
    const uint64_t groups = m / static_cast<uint64_t>(p);
    const Node group_size = groups == 0 ? 0 : static_cast<Node>(n / groups);
    if (groups == 0 || group_size < 2) return rep;  // degenerate regime: bound is trivial

    rep.groups = groups;
    rep.group_size = group_size;
    rep.finds = groups * static_cast<uint64_t>(p);

    ForestConfig fc;
    fc.n = n;
    fc.link = link;
    fc.rank_impl = rank_impl;
    fc.find = find;
    SimOptions opts;
    opts.seed = seed;
    SimRun run(fc, p, opts);

    // build one binomial tree per group, all with process 1
    std::vector<Node> deepest(groups);
    for (uint64_t g = 0; g < groups; g++) {
        const Node base = static_cast<Node>(g * group_size);
        Node pow2 = 1;
        while (pow2 * 2 <= group_size) pow2 *= 2;
        std::vector<Node> roots(pow2);
        std::iota(roots.begin(), roots.end(), base);
        while (roots.size() > 1) {
            for (size_t i = 0; i + 1 < roots.size(); i += 2)
                run.push_op(1, {OpKind::unite, roots[i], roots[i + 1]});
            run_single_proc(run);
            std::vector<Node> survivors;
            for (Node r : roots)
                if (run.forest().parent_unsafe(r) == r) survivors.push_back(r);
            roots = std::move(survivors);
        }
    }
    {
        auto snap = run.forest().snapshot();
        for (uint64_t g = 0; g < groups; g++) {
            const Node base = static_cast<Node>(g * group_size);
            Node best = base;
            uint32_t best_d = 0;
            for (Node x = base; x < base + group_size; x++) {
                const uint32_t d = depth_in(snap.parents, x);
                if (d > best_d) {
                    best_d = d;
                    best = x;
                }
            }
            deepest[g] = best;
        }
    }

    // shadowed finds: every process finds the deepest node of each group,
    // scheduled lock-step so nobody gains from anyone else's compaction
    for (int q = 1; q <= p; q++)
        for (uint64_t g = 0; g < groups; g++) run.push_op(q, {OpKind::find, deepest[g]});
    run.run(Schedule::lock_step_of(p));

    auto totals = run.forest().totals();
    rep.total_visits = totals.visits;
    rep.total_steps = totals.total_steps();
    const double k = static_cast<double>(n) * p / static_cast<double>(m);
    rep.bound = static_cast<double>(rep.finds) * std::log2(k + 1.0);
    rep.ratio = rep.bound > 0 ? static_cast<double>(rep.total_steps) / rep.bound : 0;
    return rep;
}

}  // namespace cdsu
