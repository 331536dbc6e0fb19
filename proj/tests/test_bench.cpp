#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cdsu/bench.hpp"
#include "cdsu/scenarios.hpp"

using namespace cdsu;

TEST_CASE("workload generation is deterministic per seed") {
    WorkloadSpec spec;
    spec.n = 32;
    spec.m = 100;
    spec.p = 3;
    spec.mix_unite = 0.5;
    spec.mix_find = 0.3;
    spec.mix_same = 0.2;
    spec.seed = 99;
    auto a = generate_workload(spec);
    auto b = generate_workload(spec);
    REQUIRE(a.size() == b.size());
    for (size_t p = 0; p < a.size(); p++) {
        REQUIRE(a[p].size() == b[p].size());
        for (size_t i = 0; i < a[p].size(); i++) {
            CHECK(a[p][i].kind == b[p][i].kind);
            CHECK(a[p][i].a == b[p][i].a);
            CHECK(a[p][i].b == b[p][i].b);
        }
    }
    uint64_t total = 0;
    for (const auto& prog : a) total += prog.size();
    CHECK(total == spec.m);
}

TEST_CASE("mix fractions must sum to one") {
    WorkloadSpec spec;
    spec.n = 8;
    spec.m = 10;
    spec.p = 1;
    spec.mix_unite = 0.5;
    spec.mix_find = 0.2;
    spec.mix_same = 0.2;
    CHECK_THROWS_AS(generate_workload(spec), std::invalid_argument);
}

TEST_CASE("binomial script matches the builder's executed unite sequence") {
    const Node k = 16;
    auto script = binomial_unite_script(k);
    CHECK(script.size() == k - 1);

    ForestConfig cfg;
    cfg.n = k;
    cfg.link = LinkRule::rank_dcas;
    cfg.rank_impl = RankImpl::native;
    cfg.find = FindRule::naive;
    SimRun run(cfg, 1);
    build_binomial_tree(run, k);
    const auto& recs = run.records();
    REQUIRE(recs.size() == script.size());
    for (size_t i = 0; i < script.size(); i++) {
        CHECK(recs[i].a == script[i].a);
        CHECK(recs[i].b == script[i].b);
    }
}

TEST_CASE("workload files parse ops, comments and explicit processes") {
    std::istringstream in(
        "# fixture\n"
        "U 0 1\n"
        "@2 F 3\n"
        "S 1 2  # inline comment\n"
        "F 5\n");
    auto progs = parse_workload(in, 2);
    REQUIRE(progs.size() == 3);
    // unpinned ops deal round-robin: U -> 1, S -> 2, F 5 -> 1; @2 pins F 3
    REQUIRE(progs[1].size() == 2);
    CHECK(progs[1][0].kind == OpKind::unite);
    CHECK(progs[1][1].kind == OpKind::find);
    CHECK(progs[1][1].a == 5);
    REQUIRE(progs[2].size() == 2);
    CHECK(progs[2][0].kind == OpKind::find);
    CHECK(progs[2][0].a == 3);
    CHECK(progs[2][1].kind == OpKind::same_set);

    std::istringstream bad("U 1\n");
    CHECK_THROWS_AS(parse_workload(bad, 1), std::invalid_argument);
    std::istringstream bad2("@7 F 1\n");
    CHECK_THROWS_AS(parse_workload(bad2, 2), std::invalid_argument);
}

TEST_CASE("csv output: fixed columns, blank ratio without splitting") {
    RunReport rep;
    rep.n = 8;
    rep.m = 16;
    rep.p = 2;
    rep.link = LinkRule::rank_dcas;
    rep.find = FindRule::naive;
    rep.seed = 7;
    rep.mode = "sim";
    rep.totals.visits = 100;
    rep.totals.cas_attempts = 40;
    rep.totals.cas_failures = 4;
    rep.max_rank = 3;
    rep.wall_ms = 1.5;

    std::ostringstream out;
    emit_csv(std::vector<RunReport>{rep}, out, true);
    std::istringstream lines(out.str());
    std::string header, row, extra;
    REQUIRE(std::getline(lines, header));
    REQUIRE(std::getline(lines, row));
    CHECK_FALSE(std::getline(lines, extra));
    CHECK(header ==
          "n,m,p,link,find,seed,mode,total_visits,total_cas,cas_failures,max_rank,wall_ms,ratio");
    CHECK(row == "8,16,2,rank-dcas,naive,7,sim,100,40,4,3,1.5,");
}

TEST_CASE("csv append keeps one header") {
    const std::string path = "test_bench_append.csv";
    RunReport rep;
    rep.mode = "sim";
    rep.ratio = 1.25;
    emit_csv(std::vector<RunReport>{rep}, path, false);
    emit_csv(std::vector<RunReport>{rep}, path, true);
    std::ifstream in(path);
    std::string line;
    int lines = 0, headers = 0;
    while (std::getline(in, line)) {
        lines++;
        if (line.rfind("n,m,p", 0) == 0) headers++;
    }
    std::remove(path.c_str());
    CHECK(lines == 3);
    CHECK(headers == 1);
}

TEST_CASE("one process: threaded and simulated runs count identical work") {
    WorkloadSpec spec;
    spec.n = 64;
    spec.m = 200;
    spec.p = 1;
    spec.mix_unite = 0.6;
    spec.mix_find = 0.3;
    spec.mix_same = 0.1;
    spec.seed = 5;
    for (auto link : {LinkRule::index, LinkRule::rank_dcas, LinkRule::rank_rand}) {
        ForestConfig cfg;
        cfg.link = link;
        cfg.rank_impl = RankImpl::helping;
        cfg.find = FindRule::two_try;
        auto threaded = run_threads(spec, cfg, true);
        auto simulated = run_sim(spec, cfg, Schedule::round_robin_of(1));
        REQUIRE(threaded.verified);
        REQUIRE(simulated.verified);
        CHECK(threaded.totals.visits == simulated.totals.visits);
        CHECK(threaded.totals.cas_attempts == simulated.totals.cas_attempts);
        CHECK(threaded.totals.reads == simulated.totals.reads);
        CHECK(threaded.max_rank == simulated.max_rank);
        CHECK(threaded.snapshot.parents == simulated.snapshot.parents);
        CHECK(threaded.totals.cas_failures == 0);  // uncontended
        CHECK(simulated.totals.cas_failures == 0);
    }
}

TEST_CASE("threaded runs verify partition and replay under contention") {
    WorkloadSpec spec;
    spec.n = 128;
    spec.m = 600;
    spec.p = 4;
    spec.mix_unite = 0.5;
    spec.mix_find = 0.4;
    spec.mix_same = 0.1;
    spec.seed = 31;
    for (auto link : {LinkRule::index, LinkRule::rank_dcas, LinkRule::rank_rand}) {
        ForestConfig cfg;
        cfg.link = link;
        cfg.rank_impl = RankImpl::helping;
        cfg.find = FindRule::one_try;
        auto rep = run_threads(spec, cfg, true);
        CHECK_MESSAGE(rep.verified, to_string(link) << ": " << rep.failure);
        if (link != LinkRule::index) CHECK(rep.max_rank <= 4 * 7);
    }
}

TEST_CASE("threaded runs reject the native rank realization") {
    WorkloadSpec spec;
    spec.n = 8;
    spec.m = 4;
    spec.p = 1;
    ForestConfig cfg;
    cfg.link = LinkRule::rank_dcas;
    cfg.rank_impl = RankImpl::native;
    CHECK_THROWS_AS(run_threads(spec, cfg, false), std::invalid_argument);
}

TEST_CASE("simulated runs report the work-bound ratio only with splitting") {
    WorkloadSpec spec;
    spec.n = 32;
    spec.m = 64;
    spec.p = 2;
    spec.seed = 3;
    ForestConfig cfg;
    cfg.link = LinkRule::rank_dcas;
    cfg.rank_impl = RankImpl::native;
    cfg.find = FindRule::naive;
    auto naive = run_sim(spec, cfg, Schedule::round_robin_of(2));
    CHECK_FALSE(naive.ratio.has_value());
    cfg.find = FindRule::two_try;
    auto split = run_sim(spec, cfg, Schedule::round_robin_of(2));
    REQUIRE(split.ratio.has_value());
    CHECK(*split.ratio > 0);
}
