#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <thread>

#include "cdsu/bench.hpp"
#include "cdsu/scenarios.hpp"

// Command-line harness: workload benchmarks on real threads, simulated runs
// under explicit or generated schedules, the scripted scenarios, and a
// verification mode. Exit codes: 0 success, 1 verification failure, 2 usage.

namespace {

using namespace cdsu;

struct CommonOpts {
    uint64_t n = 1 << 10;
    uint64_t m = 1 << 12;
    int p = 2;
    std::string link = "index";
    std::string find = "two";
    std::string rank_impl = "helping";
    uint64_t seed = 1;
    std::string mix = "1:0:0";
    std::string pairs = "uniform";
    std::string csv;
    bool csv_append = false;
    bool verify = false;
};

LinkRule parse_link(const std::string& s) {
    if (s == "index") return LinkRule::index;
    if (s == "rank-dcas") return LinkRule::rank_dcas;
    if (s == "rank-rand") return LinkRule::rank_rand;
    throw CLI::ValidationError("--link", "expected index|rank-dcas|rank-rand");
}

FindRule parse_find(const std::string& s) {
    if (s == "naive") return FindRule::naive;
    if (s == "one") return FindRule::one_try;
    if (s == "two") return FindRule::two_try;
    if (s == "cond-two") return FindRule::cond_two_try;
    throw CLI::ValidationError("--find", "expected naive|one|two|cond-two");
}

RankImpl parse_impl(const std::string& s) {
    if (s == "native") return RankImpl::native;
    if (s == "helping") return RankImpl::helping;
    throw CLI::ValidationError("--rank-impl", "expected native|helping");
}

PairDist parse_pairs(const std::string& s) {
    if (s == "uniform") return PairDist::uniform;
    if (s == "biased") return PairDist::biased;
    if (s == "binomial") return PairDist::binomial_script;
    throw CLI::ValidationError("--pairs", "expected uniform|biased|binomial");
}

WorkloadSpec spec_of(const CommonOpts& o) {
    WorkloadSpec spec;
    spec.n = static_cast<Node>(o.n);
    spec.m = o.m;
    spec.p = o.p;
    spec.seed = o.seed;
    spec.pairs = parse_pairs(o.pairs);
    double u = 1, f = 0, s = 0;
    if (std::sscanf(o.mix.c_str(), "%lf:%lf:%lf", &u, &f, &s) != 3)
        throw CLI::ValidationError("--mix", "expected u:f:s fractions");
    spec.mix_unite = u;
    spec.mix_find = f;
    spec.mix_same = s;
    return spec;
}

ForestConfig config_of(const CommonOpts& o) {
    ForestConfig cfg;
    cfg.n = static_cast<Node>(o.n);
    cfg.link = parse_link(o.link);
    cfg.find = parse_find(o.find);
    cfg.rank_impl = parse_impl(o.rank_impl);
    return cfg;
}

void add_common(CLI::App* app, CommonOpts& o) {
    app->add_option("--n", o.n, "element count");
    app->add_option("--m", o.m, "operation count");
    app->add_option("--p", o.p, "process count");
    app->add_option("--link", o.link, "index|rank-dcas|rank-rand");
    app->add_option("--find", o.find, "naive|one|two|cond-two");
    app->add_option("--rank-impl", o.rank_impl, "native (sim only)|helping");
    app->add_option("--seed", o.seed, "run seed");
    app->add_option("--mix", o.mix, "unite:find:same-set fractions");
    app->add_option("--pairs", o.pairs, "uniform|biased|binomial");
    app->add_option("--csv", o.csv, "append/write report row(s) to this file");
    app->add_flag("--append", o.csv_append, "append to the csv instead of overwriting");
}

void print_report(const RunReport& r) {
    std::cout << "mode=" << r.mode << " n=" << r.n << " m=" << r.m << " p=" << r.p
              << " link=" << to_string(r.link) << " find=" << to_string(r.find)
              << " seed=" << r.seed << "\n";
    std::cout << "  visits=" << r.totals.visits << " reads=" << r.totals.reads
              << " cas=" << r.totals.cas_attempts << " cas_failures=" << r.totals.cas_failures
              << " link_attempts=" << r.totals.link_attempts << " help_steps="
              << r.totals.help_steps << "\n";
    std::cout << "  max_op_visits=" << r.totals.max_op_visits << " max_rank=" << r.max_rank
              << " height=" << r.forest_height << " wall_ms=" << r.wall_ms;
    if (r.ratio) std::cout << " ratio=" << *r.ratio;
    std::cout << "\n";
    if (!r.verified) std::cout << "  VERIFICATION FAILED: " << r.failure << "\n";
}

void maybe_csv(const CommonOpts& o, const RunReport& r) {
    if (!o.csv.empty()) emit_csv(std::vector<RunReport>{r}, o.csv, o.csv_append);
}

Schedule schedule_of(const std::string& s, int procs, uint64_t seed) {
    if (s.empty() || s == "roundrobin" || s == "round-robin") return Schedule::round_robin_of(procs);
    if (s == "lockstep" || s == "lock-step") return Schedule::lock_step_of(procs);
    if (s.rfind("random", 0) == 0) return Schedule::random_of(procs, seed);
    return Schedule::parse_file(s);  // a fixture file
}

int cmd_bench(const CommonOpts& o) {
    if (o.p > static_cast<int>(std::thread::hardware_concurrency()))
        std::cerr << "warning: " << o.p << " workers on "
                  << std::thread::hardware_concurrency() << " hardware threads\n";
    if (o.m < o.n)
        std::cerr << "warning: m < n leaves the usual m >= n assumption unexercised\n";
    auto rep = run_threads(spec_of(o), config_of(o), o.verify);
    print_report(rep);
    maybe_csv(o, rep);
    return rep.verified ? 0 : 1;
}

int cmd_sim(const CommonOpts& o, const std::string& schedule, const std::string& workload,
            const std::string& trace_path) {
    auto spec = spec_of(o);
    auto cfg = config_of(o);
    std::vector<std::vector<OpSpec>> programs;
    const std::vector<std::vector<OpSpec>>* programs_ptr = nullptr;
    if (!workload.empty()) {
        programs = parse_workload_file(workload, spec.p);
        programs_ptr = &programs;
    }
    if (!trace_path.empty()) {
        // traced run outside the bench wrapper so the trace can be saved
        SimOptions opts;
        opts.seed = spec.seed;
        opts.collect_trace = true;
        SimRun run(cfg, spec.p, opts);
        auto progs = programs_ptr ? programs : generate_workload(spec);
        for (int q = 1; q <= spec.p; q++) run.push_program(q, progs[q]);
        run.run(schedule_of(schedule, spec.p, spec.seed));
        std::ofstream out(trace_path);
        SimRun::dump_trace(run.trace(), out);
    }
    auto rep = run_sim(spec, cfg, schedule_of(schedule, spec.p, spec.seed), programs_ptr);
    print_report(rep);
    maybe_csv(o, rep);
    return rep.verified ? 0 : 1;
}

int cmd_scenario(const CommonOpts& o, const std::string& name, uint64_t k) {
    auto cfg = config_of(o);
    if (name == "wakeup") {
        auto res = scenario_wakeup(cfg, static_cast<int>(k), Schedule::random_of(static_cast<int>(k), o.seed),
                                   o.seed);
        std::cout << "wakeup k=" << k << " at_least_one_true=" << res.at_least_one_true
                  << " none_true_before_all_started=" << res.none_true_before_all_started << "\n";
        return res.at_least_one_true && res.none_true_before_all_started ? 0 : 1;
    }
    if (name == "sqrt-p-path" || name == "sqrt-p-path-independent") {
        const bool adversary = name == "sqrt-p-path";
        auto rep = scenario_sqrt_p_path(static_cast<Node>(o.n), o.p, parse_find(o.find), o.seed,
                                        adversary);
        std::cout << "sqrt-p-path adversary=" << adversary << " s=" << rep.s
                  << " max_depth=" << rep.max_depth << " mean_depth=" << rep.mean_member_depth
                  << " mean_find_visits=" << rep.mean_find_visits
                  << " total_visits=" << rep.total_visits << "\n";
        return 0;
    }
    if (name == "log-lowerbound") {
        auto rep = scenario_log_lowerbound(static_cast<Node>(o.n), o.p, o.m, parse_link(o.link),
                                           parse_impl(o.rank_impl), parse_find(o.find), o.seed);
        std::cout << "log-lowerbound groups=" << rep.groups << " group_size=" << rep.group_size
                  << " finds=" << rep.finds << " total_steps=" << rep.total_steps
                  << " bound=" << rep.bound << " ratio=" << rep.ratio << "\n";
        return 0;
    }
    if (name == "binomial") {
        ForestConfig fc = cfg;
        fc.n = static_cast<Node>(o.n);
        SimOptions opts;
        opts.seed = o.seed;
        SimRun run(fc, 1, opts);
        build_binomial_tree(run, static_cast<Node>(k));
        auto snap = run.forest().snapshot();
        std::cout << "binomial k=" << k << " height=" << height_of(snap.parents) << "\n";
        return 0;
    }
    if (name == "random-index-tree") {
        ForestConfig fc = cfg;
        fc.link = LinkRule::index;
        fc.n = static_cast<Node>(o.n);
        SimOptions opts;
        opts.seed = o.seed;
        SimRun run(fc, 1, opts);
        auto tree = build_random_index_tree(run, static_cast<Node>(k), o.seed);
        auto snap = run.forest().snapshot();
        uint64_t depth_sum = 0;
        for (Node mnode : tree.members) depth_sum += depth_in(snap.parents, mnode);
        std::cout << "random-index-tree k=" << k
                  << " mean_depth=" << static_cast<double>(depth_sum) / tree.members.size()
                  << " rounds=" << tree.designated.size() - 1 << "\n";
        return 0;
    }
    std::cerr << "unknown scenario '" << name << "'\n";
    return 2;
}

int cmd_verify(const CommonOpts& o, const std::string& schedule, bool threaded) {
    int rc;
    if (threaded) {
        auto rep = run_threads(spec_of(o), config_of(o), true);
        print_report(rep);
        rc = rep.verified ? 0 : 1;
    } else {
        auto rep = run_sim(spec_of(o), config_of(o), schedule_of(schedule, o.p, o.seed));
        print_report(rep);
        rc = rep.verified ? 0 : 1;
    }
    std::cout << (rc == 0 ? "verification passed" : "verification FAILED") << "\n";
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"concurrent disjoint set union workbench"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string schedule, workload, trace_path, scenario_name;
    uint64_t k = 8;
    bool threaded = false;

    auto* bench = app.add_subcommand("bench", "threaded benchmark run");
    add_common(bench, o);
    bench->add_flag("--verify", o.verify, "log operations and check the run afterwards");

    auto* sim = app.add_subcommand("sim", "deterministic simulated run");
    add_common(sim, o);
    sim->add_option("--schedule", schedule, "roundrobin|lockstep|random|<fixture file>");
    sim->add_option("--workload", workload, "workload file instead of a generated one");
    sim->add_option("--trace", trace_path, "dump the step trace to this file");

    auto* scen = app.add_subcommand("scenario", "scripted constructions and schedules");
    add_common(scen, o);
    scen->add_option("--scenario", scenario_name,
                     "wakeup|sqrt-p-path|sqrt-p-path-independent|log-lowerbound|binomial|"
                     "random-index-tree")
        ->required();
    scen->add_option("--k", k, "construction size parameter");

    auto* verify = app.add_subcommand("verify", "run with all checkers enabled");
    add_common(verify, o);
    verify->add_option("--schedule", schedule, "roundrobin|lockstep|random|<fixture file>");
    verify->add_flag("--threads", threaded, "verify a threaded run instead of a simulated one");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (bench->parsed()) return cmd_bench(o);
        if (sim->parsed()) return cmd_sim(o, schedule, workload, trace_path);
        if (scen->parsed()) return cmd_scenario(o, scenario_name, k);
        if (verify->parsed()) return cmd_verify(o, schedule, threaded);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
