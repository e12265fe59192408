#include "btlab/checker.hpp"
#include "btlab/ep_async.hpp"
#include "btlab/errors.hpp"
#include "btlab/oracle.hpp"
#include "btlab/rng.hpp"
#include "btlab/sim.hpp"

#include <doctest.h>

#include <set>

using namespace btlab;

namespace
{
    NetConfig net(std::size_t n, Tick horizon, std::uint64_t seed, Adversary adv = Adversary::TargetedRace)
    {
        NetConfig cfg;
        cfg.n = n;
        cfg.horizon = horizon;
        cfg.seed = seed;
        cfg.gst = horizon;
        cfg.adversary = adv;
        return cfg;
    }

    std::size_t widest(const Blocktree &bt)
    {
        std::size_t w = 0;
        for (const auto &b : bt.blocks())
            w = std::max(w, bt.child_count(b->id));
        return w;
    }
}

TEST_CASE("lone process appends on genesis")
{
    Oracle o(standard_validity());
    History h;
    CHECK(ep_append(o, h, ProcessId{0}, 0, 0, ep_payload(ProcessId{0}, 0)));
    CHECK(o.global().size() == 2);
    CHECK(h.size() == 2);
    CHECK(h.event(1).ack);
}

TEST_CASE("an invalid payload is refused and leaves the tree alone")
{
    Oracle o(standard_validity());
    History h;
    CHECK_FALSE(ep_append(o, h, ProcessId{0}, 0, 0, invalid_payload()));
    CHECK(o.global().size() == 1);
    CHECK_FALSE(h.event(1).ack);
}

TEST_CASE("fresh read returns genesis; readers agree after quiescence")
{
    Oracle o(standard_validity());
    History h;
    CHECK(ep_read(o, &h, ProcessId{0}, 0, 0) == Chain());
    Rng rng(3);
    for (Tick t = 1; t < 200; ++t)
    {
        o.advance_to(t);
        const ProcessId p{static_cast<std::uint32_t>(rng.uniform(0, 3))};
        ep_append(o, h, p, t, t - rng.uniform(0, std::min<Tick>(t, 5)), ep_payload(p, t));
    }
    o.advance_to(300);
    const Chain a = ep_read(o, &h, ProcessId{1}, 300, 300);
    const Chain b = ep_read(o, &h, ProcessId{2}, 300, 300);
    CHECK(a == b);
    CHECK(a.size() > 10);
}

TEST_CASE("behavior names round trip")
{
    for (auto b : {EpBehavior::Correct, EpBehavior::ForkSpam, EpBehavior::Grind, EpBehavior::Stale, EpBehavior::Silent})
        CHECK(ep_behavior_from_string(to_string(b)) == b);
    CHECK_FALSE(ep_behavior_from_string("sneaky"));
}

TEST_CASE("payloads are unique per process and sequence")
{
    std::set<Bytes> seen;
    for (std::uint32_t p = 0; p < 5; ++p)
        for (std::uint64_t s = 0; s < 50; ++s)
            CHECK(seen.insert(ep_payload(ProcessId{p}, s)).second);
}

TEST_CASE("byzantine steps attach what they claim and record every append")
{
    for (auto behavior : {EpBehavior::ForkSpam, EpBehavior::Grind, EpBehavior::Stale, EpBehavior::Silent})
    {
        Oracle o(standard_validity());
        History h;
        Rng rng(11);
        std::uint64_t seq = 0;
        for (Tick t = 1; t < 30; ++t)
        {
            o.advance_to(t);
            ep_append(o, h, ProcessId{0}, t, t, ep_payload(ProcessId{0}, 1000 + t));
        }
        const std::size_t before = o.global().size();
        std::size_t attached = 0;
        for (Tick t = 30; t < 40; ++t)
        {
            o.advance_to(t);
            attached += ep_byzantine_step(o, h, ProcessId{1}, behavior, t, t, rng, seq, EpAttack{});
        }
        CHECK(o.global().size() == before + attached);
        if (behavior == EpBehavior::Silent)
            CHECK(attached == 0);
        else
            CHECK(attached > 0);
        if (behavior == EpBehavior::ForkSpam)
            CHECK(widest(o.global()) >= 2);
        for (const auto &b : o.global().blocks())
        {
            if (!b->is_genesis())
                CHECK(!h.append_invocations(b->id).empty());
        }
    }
}

TEST_CASE("seven correct processes, a hundred appends each, adversarial schedule")
{
    EpWorkload wl;
    wl.append_every = 20;
    const auto run = run_ep(net(7, 2000, 9), wl);
    CHECK(run.correct_successful_appends >= 600);
    CHECK(run.tree.size() == run.correct_successful_appends + 1);
    for (const auto &b : run.tree.blocks())
    {
        CHECK(run.tree.chain_to(b->id)[0].id == genesis_block()->id);
        if (!b->is_genesis())
            CHECK(!run.history.append_invocations(b->id).empty());
    }
    CHECK(widest(run.tree) <= 7);
    CHECK(run.max_fork_width == widest(run.tree));
}

TEST_CASE("ep-async runs satisfy validity, integrity, growth and eventual prefix")
{
    const char *attacks[] = {"fork-spam", "grind", "stale", "silent"};
    for (std::size_t n : {4, 7})
    {
        for (std::size_t byz : {std::size_t{0}, n / 2, n - 1})
        {
            for (auto adv : {Adversary::Fifo, Adversary::RandomDelay, Adversary::TargetedRace})
            {
                NetConfig cfg = net(n, 3000, 100 + n * 10 + byz);
                cfg.adversary = adv;
                for (std::size_t i = 0; i < byz; ++i)
                    cfg.byzantine[ProcessId{static_cast<std::uint32_t>(n - 1 - i)}] = attacks[i % 4];
                EpWorkload wl;
                wl.append_every = 3 * n * (cfg.delta + 1);
                const auto run = run_ep(cfg, wl);
                CheckConfig cc;
                cc.k = run.correct_successful_appends / 2;
                cc.horizon = cfg.horizon;
                const auto rep = run_all(run.history, cc);
                CAPTURE(n);
                CAPTURE(byz);
                CAPTURE(to_string(adv));
                CHECK(rep.verdict(Criterion::ChainValidity).pass());
                CHECK(rep.verdict(Criterion::ChainIntegrity).pass());
                CHECK(rep.verdict(Criterion::EverGrowingTree).pass());
                CHECK(rep.verdict(Criterion::EventualPrefix).pass());
                CHECK(lattice_consistent(rep));
            }
        }
    }
}

TEST_CASE("per-position churn grows by at most n when the horizon doubles")
{
    for (std::size_t n : {4, 7})
    {
        NetConfig cfg = net(n, 1000, 42);
        cfg.byzantine[ProcessId{0}] = "grind";
        const auto c1 = churn(run_ep(cfg, EpWorkload{}).history);
        cfg.horizon = 2000;
        cfg.gst = 2000;
        const auto c2 = churn(run_ep(cfg, EpWorkload{}).history);
        for (const auto &[pos, count] : c1)
        {
            const std::size_t later = c2.count(pos) ? c2.at(pos) : 0;
            CHECK(later <= count + n);
        }
        for (const auto &[pos, count] : c2)
            CHECK(count <= n);
    }
}
