#include "btlab/counterexample.hpp"

#include "btlab/errors.hpp"
#include "btlab/rng.hpp"

#include <stdexcept>

namespace btlab
{
    std::uint64_t race_weight(const Block &b)
    {
        if (b.is_genesis())
            return 1;
        auto w = payload_u64(b.payload);
        return w && *w > 0 ? *w : 1;
    }

    Chain race_select(const Blocktree &bt) { return f_longest(bt, race_weight); }

    namespace
    {
        struct Racer
        {
            ProcessId id;
            BlockPtr tip;         // last block set on its branch
            std::uint64_t s = 1;  // weighted length up to tip
            BlockPtr poised;      // granted, not yet set
        };

        class Script
        {
        public:
            Script(CounterexampleRun &run, std::uint64_t seed)
                : run_(run), oracle_(standard_validity(), 2), rng_(seed)
            {
            }

            Oracle &oracle() { return oracle_; }
            Tick now() const { return now_; }

            void step()
            {
                ++now_;
                oracle_.advance_to(now_);
            }

            BlockPtr mint(const Racer &r, const Block &parent, std::uint64_t weight)
            {
                Bytes payload = u64_payload(weight);
                auto nonce = u64_payload(rng_.next());
                payload.insert(payload.end(), nonce.begin(), nonce.end());
                return make_block(parent, r.id, 0, std::move(payload));
            }

            void grant(Racer &r, BlockPtr b)
            {
                if (!oracle_.get_valid_block(r.id, b->parent, b))
                    throw std::logic_error("race block refused by the oracle");
                run_.history.append_inv(r.id, now_, b);
                r.poised = std::move(b);
            }

            std::vector<BlockId> set(Racer &r)
            {
                auto kids = oracle_.set_valid_block(r.id, r.poised->parent, r.poised);
                run_.history.append_rsp(r.id, now_, true);
                r.s += race_weight(*r.poised);
                r.tip = std::move(r.poised);
                return kids;
            }

            Chain view_chain(ProcessId p) { return race_select(oracle_.update_view(p, now_).tree); }

            void read(ProcessId p)
            {
                run_.history.read_inv(p, now_);
                run_.history.read_rsp(p, now_, view_chain(p));
            }

            // One weight-1 append along the process's selected chain.
            void append(Racer &r)
            {
                const Chain sel = view_chain(r.id);
                if (sel.tip().id != r.tip->id)
                    throw std::logic_error("race selection left the leader's branch");
                grant(r, mint(r, sel.tip(), 1));
                set(r);
            }

        private:
            CounterexampleRun &run_;
            Oracle oracle_;
            Rng rng_;
            Tick now_ = 0;
        };
    }

    CounterexampleRun run_counterexample(const std::vector<std::size_t> &h_targets, std::size_t rounds,
                                         std::uint64_t seed)
    {
        if (rounds < 1)
            throw ConfigError("rounds must be at least 1");
        if (h_targets.empty())
            throw ConfigError("h_targets must not be empty");
        for (auto h : h_targets)
        {
            if (h == 0)
                throw ConfigError("h_targets entries must be positive");
        }
        auto target = [&](std::size_t phase) { return static_cast<std::uint64_t>(h_targets[phase % h_targets.size()]); };

        CounterexampleRun run;
        Script script(run, seed);
        Racer racers[2] = {{run.p1, genesis_block(), 1, nullptr}, {run.p2, genesis_block(), 1, nullptr}};

        // Both appenders see only genesis and obtain grants for the two children
        // the fork bound allows. p2's block is heavy enough to overtake p1's first
        // phase once it lands.
        script.view_chain(run.p1);
        script.view_chain(run.p2);
        script.grant(racers[0], script.mint(racers[0], *genesis_block(), 1));
        script.grant(racers[1], script.mint(racers[1], *genesis_block(), target(0) + 1));
        run.first_block_1 = racers[0].poised->id;
        run.first_block_2 = racers[1].poised->id;

        for (std::size_t phase = 0;; ++phase)
        {
            Racer &lead = racers[phase % 2];
            Racer &other = racers[(phase + 1) % 2];

            script.step();
            const std::uint64_t before = lead.s;
            script.set(lead);
            if (phase > 0)
            {
                run.lead_changes.push_back({phase, script.now(), lead.id, before, lead.s, other.s});
            }
            script.step();
            script.read(lead.id);
            script.read(run.observer);
            if (phase == rounds)
                break;

            for (std::uint64_t i = 1; i < target(phase); ++i)
            {
                script.step();
                script.append(lead);
                script.step();
                script.read(lead.id);
                script.read(run.observer);
            }

            // Poise the next block so that it overtakes the other branch after that
            // branch's coming phase.
            script.step();
            const Chain sel = script.view_chain(lead.id);
            const std::uint64_t other_final = other.s + race_weight(*other.poised) + (target(phase + 1) - 1);
            script.grant(lead, script.mint(lead, sel.tip(), other_final - lead.s + 1));
        }

        run.tree = script.oracle().global();
        run.audit = script.oracle().audit();
        return run;
    }
}
