#include "support/brute_force.hpp"

#include "btlab/ep_async.hpp"
#include "btlab/errors.hpp"
#include "btlab/oracle.hpp"
#include "btlab/sim.hpp"
#include "btlab/trace.hpp"

#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

using namespace btlab;

namespace
{
    const ProcessId p0{0}, p1{1}, p2{2};

    void check_relations(const History &h)
    {
        const auto closure = bf::program_order(h);
        for (std::size_t a = 0; a < h.size(); ++a)
        {
            CHECK_FALSE(h.process_precedes(a, a));
            CHECK_FALSE(h.operation_precedes(a, a));
            CHECK_FALSE(h.program_precedes(a, a));
            for (std::size_t b = 0; b < h.size(); ++b)
            {
                if (h.process_precedes(a, b) || h.operation_precedes(a, b))
                    CHECK(h.program_precedes(a, b));
                CHECK(h.program_precedes(a, b) == closure[a][b]);
                // eid order refines program order.
                if (closure[a][b])
                    CHECK(a < b);
            }
        }
    }
}

TEST_CASE("read pair on an empty history")
{
    History h;
    h.read_inv(p0, 0);
    h.read_rsp(p0, 1, Chain());
    CHECK(h.size() == 2);
    CHECK(h.reads_in_program_order().size() == 1);
    CHECK(h.invocation_of(1) == 0);
}

TEST_CASE("malformed histories are rejected")
{
    SUBCASE("response before its invocation")
    {
        History h;
        h.read_inv(p0, 5);
        Event e;
        e.process = p0;
        e.kind = EventKind::ReadRsp;
        e.tick = 4;
        e.chain = Chain();
        CHECK_THROWS_AS(h.record(e), HistoryError);
    }
    SUBCASE("orphan response")
    {
        History h;
        CHECK_THROWS_AS(h.append_rsp(p0, 0, true), HistoryError);
    }
    SUBCASE("overlapping operations on one process")
    {
        History h;
        h.read_inv(p0, 0);
        CHECK_THROWS_AS(h.read_inv(p0, 1), HistoryError);
    }
    SUBCASE("mismatched response kind")
    {
        History h;
        h.read_inv(p0, 0);
        CHECK_THROWS_AS(h.append_rsp(p0, 1, true), HistoryError);
    }
    SUBCASE("tick regression")
    {
        History h;
        h.read_inv(p0, 3);
        h.read_rsp(p0, 3, Chain());
        CHECK_THROWS_AS(h.read_inv(p0, 2), HistoryError);
    }
    SUBCASE("append without a block")
    {
        History h;
        CHECK_THROWS_AS(h.append_inv(p0, 0, nullptr), HistoryError);
    }
}

TEST_CASE("reads in program order")
{
    History h;
    const Chain g;
    h.read_inv(p0, 0);
    h.read_rsp(p0, 1, g);
    h.read_inv(p1, 1);
    h.read_rsp(p1, 2, g);
    h.read_inv(p0, 2);
    h.read_rsp(p0, 3, g);
    auto all = h.reads_in_program_order();
    REQUIRE(all.size() == 3);
    CHECK(all[0]->eid == 1);
    CHECK(all[1]->eid == 3);
    CHECK(all[2]->eid == 5);

    auto only0 = h.reads_in_program_order(p0);
    REQUIRE(only0.size() == 2);
    CHECK(only0[0] == all[0]);
    CHECK(only0[1] == all[2]);
}

TEST_CASE("overlapping reads are linearized by eid without contradicting program order")
{
    History h;
    h.read_inv(p0, 0);
    h.read_inv(p1, 1);
    h.read_rsp(p1, 2, Chain());
    h.read_rsp(p0, 3, Chain());
    auto rs = h.reads_in_program_order();
    REQUIRE(rs.size() == 2);
    CHECK(rs[0]->process == p1);
    CHECK_FALSE(h.program_precedes(rs[1]->eid, rs[0]->eid));
    CHECK_FALSE(h.program_precedes(rs[0]->eid, rs[1]->eid));
    check_relations(h);
}

TEST_CASE("equal ticks leave operations unordered")
{
    History h;
    h.read_inv(p0, 4);
    h.read_rsp(p0, 4, Chain());
    h.read_inv(p1, 4);
    h.read_rsp(p1, 5, Chain());
    CHECK_FALSE(h.operation_precedes(1, 2));
    CHECK_FALSE(h.program_precedes(1, 2));
    h.read_inv(p2, 5);
    CHECK_FALSE(h.program_precedes(3, 4));
    CHECK(h.program_precedes(1, 4));
}

TEST_CASE("program order matches the explicit closure on random histories")
{
    std::mt19937_64 rng(99);
    for (int i = 0; i < 1500; ++i)
    {
        auto g = bf::random_history(rng);
        check_relations(g.history);
    }
}

TEST_CASE("program order matches the explicit closure on a protocol run")
{
    NetConfig cfg;
    cfg.n = 4;
    cfg.byzantine = {{ProcessId{3}, "fork-spam"}};
    cfg.horizon = 300;
    cfg.seed = 5;
    cfg.adversary = Adversary::RandomDelay;
    EpWorkload wl;
    wl.append_every = 10;
    wl.read_every = 12;
    const auto run = run_ep(cfg, wl);
    CHECK(run.history.size() > 100);
    CHECK(run.history.size() <= 1000);
    check_relations(run.history);
}

TEST_CASE("sequential ep-async appends all surface in later reads")
{
    Oracle oracle(standard_validity());
    History h;
    std::set<BlockId> acked;
    Tick now = 1;
    for (std::uint64_t seq = 0; seq < 50; ++seq, now += 2)
    {
        const ProcessId p{static_cast<std::uint32_t>(seq % 4)};
        oracle.advance_to(now);
        REQUIRE(ep_append(oracle, h, p, now, now, ep_payload(p, seq)));
        acked.insert(h.events().at(h.size() - 2).block->id);
    }
    now += 5;
    oracle.advance_to(now);
    std::set<BlockId> seen;
    for (std::uint32_t p = 0; p < 4; ++p)
    {
        const Chain bc = ep_read(oracle, &h, ProcessId{p}, now, now);
        for (const auto &b : bc.blocks())
            seen.insert(b->id);
    }
    CHECK(acked.size() == 50);
    for (const auto &id : acked)
        CHECK(seen.count(id) == 1);
}

TEST_CASE("trace round trip is byte-identical")
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i)
    {
        auto g = bf::random_history(rng);
        const json header{{"seed", i}, {"protocol", "random"}};
        const std::string text = trace_to_string(header, g.history);
        std::istringstream in(text);
        const Trace back = read_trace(in);
        CHECK(back.header["seed"] == i);
        CHECK(back.history.size() == g.history.size());
        CHECK(trace_to_string(header, back.history) == text);
    }
}

TEST_CASE("the same seed reproduces the same trace")
{
    NetConfig cfg;
    cfg.n = 4;
    cfg.byzantine = {{ProcessId{2}, "grind"}};
    cfg.horizon = 500;
    cfg.seed = 77;
    cfg.adversary = Adversary::TargetedRace;
    const EpWorkload wl;
    const std::string a = trace_to_string({}, run_ep(cfg, wl).history);
    const std::string b = trace_to_string({}, run_ep(cfg, wl).history);
    CHECK(a == b);
    cfg.seed = 78;
    CHECK(trace_to_string({}, run_ep(cfg, wl).history) != a);
}

TEST_CASE("malformed trace lines are reported")
{
    auto parse = [](const std::string &text) {
        std::istringstream in(text);
        return read_trace(in);
    };
    CHECK_THROWS_AS(parse("not json\n"), TraceFormatError);
    CHECK_THROWS_AS(parse("{\"type\":\"header\"}\n{\"type\":\"event\",\"eid\":0}\n"), TraceFormatError);
    CHECK_THROWS_AS(parse("{\"type\":\"header\"}\n{\"type\":\"event\",\"eid\":0,\"process\":0,\"kind\":\"read_rsp\","
                          "\"tick\":0,\"chain\":[]}\n"),
                    HistoryError);
    try
    {
        parse("{\"type\":\"header\"}\n{\"type\":\"bogus\"}\n");
        FAIL("expected an error");
    }
    catch (const TraceFormatError &e)
    {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}
