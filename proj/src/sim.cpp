#include "btlab/sim.hpp"

#include "btlab/errors.hpp"

#include <algorithm>
#include <numeric>

namespace btlab
{
    const char *to_string(Adversary a)
    {
        switch (a)
        {
        case Adversary::Fifo:
            return "fifo";
        case Adversary::RandomDelay:
            return "random-delay";
        case Adversary::TargetedRace:
            return "targeted-race";
        }
        return "?";
    }

    std::optional<Adversary> adversary_from_string(const std::string &s)
    {
        for (auto a : {Adversary::Fifo, Adversary::RandomDelay, Adversary::TargetedRace})
        {
            if (s == to_string(a))
                return a;
        }
        return std::nullopt;
    }

    std::vector<ProcessId> NetConfig::correct_processes() const
    {
        std::vector<ProcessId> out;
        for (std::uint32_t i = 0; i < n; ++i)
        {
            if (!is_byzantine(ProcessId{i}))
                out.push_back(ProcessId{i});
        }
        return out;
    }

    void NetConfig::validate() const
    {
        if (n == 0)
            throw ConfigError("n must be positive");
        if (delta < 1)
            throw ConfigError("delta must be at least 1");
        if (horizon < 1)
            throw ConfigError("horizon must be positive");
        if (gst > horizon)
            throw ConfigError("gst must not exceed the horizon");
        for (const auto &[p, tag] : byzantine)
        {
            if (p.value >= n)
                throw ConfigError("byzantine process id out of range");
        }
        for (const auto &[p, t] : crash_at)
        {
            if (p.value >= n)
                throw ConfigError("crash process id out of range");
        }
    }

    Tick schedule_delivery(const NetConfig &cfg, Tick sent, const LinkInfo &link, Rng &rng)
    {
        const Tick bound = std::max(cfg.gst, sent + cfg.delta);
        if (sent >= cfg.gst)
            return cfg.adversary == Adversary::Fifo ? sent + 1 : sent + rng.uniform(1, cfg.delta);
        switch (cfg.adversary)
        {
        case Adversary::Fifo:
            return sent + 1;
        case Adversary::RandomDelay:
            if (!link.sender_correct)
                return sent + rng.uniform(1, cfg.delta);
            return rng.uniform(sent + 1, bound);
        case Adversary::TargetedRace:
            if (link.cross_group)
                return bound;
            return sent + rng.uniform(1, cfg.delta);
        }
        return sent + 1;
    }

    namespace
    {
        Tick staleness(const NetConfig &cfg, Rng &rng)
        {
            switch (cfg.adversary)
            {
            case Adversary::Fifo:
                return 0;
            case Adversary::RandomDelay:
                return rng.uniform(0, cfg.delta);
            case Adversary::TargetedRace:
                return cfg.delta;
            }
            return 0;
        }

        bool crashed_at(const NetConfig &cfg, ProcessId p, Tick t)
        {
            auto it = cfg.crash_at.find(p);
            return it != cfg.crash_at.end() && t >= it->second;
        }
    }

    EpRun run_ep(const NetConfig &cfg, const EpWorkload &wl)
    {
        cfg.validate();
        if (wl.append_every < 1 || wl.read_every < 1)
            throw ConfigError("append_every and read_every must be positive");

        struct Proc
        {
            ProcessId id;
            EpBehavior behavior = EpBehavior::Correct;
            Tick next_append = 0;
            Tick read_offset = 0;
            std::uint64_t seq = 0;
        };

        Rng rng(cfg.seed);
        std::vector<Proc> procs(cfg.n);
        for (std::uint32_t i = 0; i < cfg.n; ++i)
        {
            Proc &pr = procs[i];
            pr.id = ProcessId{i};
            auto tag = cfg.byzantine.find(pr.id);
            if (tag != cfg.byzantine.end())
            {
                auto b = ep_behavior_from_string(tag->second);
                if (!b)
                    throw ConfigError("unknown ep-async behavior " + tag->second);
                pr.behavior = *b;
            }
            pr.next_append = rng.uniform(0, wl.append_every - 1);
            pr.read_offset = rng.uniform(0, wl.read_every - 1);
        }

        EpRun run;
        run.correct = cfg.correct_processes();
        Oracle oracle(standard_validity(), wl.fork_bound);
        std::vector<std::size_t> order(cfg.n);
        std::iota(order.begin(), order.end(), 0);

        for (Tick t = 0; t < cfg.horizon; ++t)
        {
            oracle.advance_to(t);
            // The adversary picks the interleaving of this tick's operations.
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[rng.uniform(0, i - 1)]);

            for (auto idx : order)
            {
                Proc &pr = procs[idx];
                if (crashed_at(cfg, pr.id, t))
                    continue;
                const bool correct = pr.behavior == EpBehavior::Correct;
                if (t == pr.next_append)
                {
                    // Jittered so that no two processes stay phase-locked.
                    pr.next_append = t + rng.uniform(1, 2 * wl.append_every - 1);
                    const Tick as_of = t - std::min(t, staleness(cfg, rng));
                    if (!correct && rng.chance(wl.attack_probability))
                        ep_byzantine_step(oracle, run.history, pr.id, pr.behavior, t, as_of, rng, pr.seq, wl.attack);
                    else if (pr.behavior != EpBehavior::Silent)
                        ep_append(oracle, run.history, pr.id, t, as_of, ep_payload(pr.id, pr.seq++));
                }
                if (correct && (t + pr.read_offset) % wl.read_every == 0)
                {
                    const Tick as_of = t - std::min(t, staleness(cfg, rng));
                    ep_read(oracle, &run.history, pr.id, t, as_of);
                }
            }
        }

        run.tree = oracle.global();
        run.audit = oracle.audit();
        run.max_fork_width = oracle.max_fork_width();
        run.correct_successful_appends = run.history.successful_appends(&run.correct);
        return run;
    }

    StreamletSystem::StreamletSystem(NetConfig cfg, StreamletWorkload wl)
        : cfg_(std::move(cfg)), wl_(wl), rng_(cfg_.seed)
    {
        cfg_.validate();
        if (wl_.read_every < 1)
            throw ConfigError("read_every must be positive");

        StreamletParams params;
        params.n = cfg_.n;
        params.delta = cfg_.delta;
        params.seed = cfg_.seed;
        params.two_thirds = wl_.two_thirds;
        params.validity = standard_validity();

        const auto correct = cfg_.correct_processes();
        const std::size_t half = (correct.size() + 1) / 2;
        for (std::size_t i = 0; i < half; ++i)
            group_a_.insert(correct[i]);

        for (std::uint32_t i = 0; i < cfg_.n; ++i)
        {
            const ProcessId p{i};
            StreamletBehavior behavior = StreamletBehavior::Correct;
            auto tag = cfg_.byzantine.find(p);
            if (tag != cfg_.byzantine.end())
            {
                auto b = streamlet_behavior_from_string(tag->second);
                if (!b || *b == StreamletBehavior::Correct)
                    throw ConfigError("unknown streamlet behavior " + tag->second);
                behavior = *b;
            }
            nodes_.emplace_back(p, params, behavior);
            read_offset_[p] = rng_.uniform(0, wl_.read_every - 1);
        }

        std::vector<ProcessId> first, second;
        for (std::uint32_t i = 0; i < cfg_.n; ++i)
        {
            const ProcessId p{i};
            if (cfg_.is_byzantine(p) || group_a_.count(p))
                first.push_back(p);
            else
                second.push_back(p);
        }
        for (auto &node : nodes_)
        {
            if (node.behavior() == StreamletBehavior::Equivocator)
                node.set_audiences(first, second);
        }
    }

    bool StreamletSystem::crashed(ProcessId p) const { return crashed_at(cfg_, p, now_); }

    void StreamletSystem::send(ProcessId from, const Outgoing &o)
    {
        auto deliver = [&](ProcessId to) {
            if (to == from)
                return;
            LinkInfo link;
            link.sender_correct = !cfg_.is_byzantine(from);
            link.recipient_correct = !cfg_.is_byzantine(to);
            link.cross_group = link.sender_correct && link.recipient_correct &&
                               group_a_.count(from) != group_a_.count(to);
            const Tick at = schedule_delivery(cfg_, now_, link, rng_);
            deliveries_.push_back({from, to, now_, at, link.sender_correct,
                                   o.msg.kind == StreamletMessage::Kind::Vote});
            queue_.push({at, seq_++, to, o.msg});
        };
        if (o.to.empty())
        {
            for (std::uint32_t i = 0; i < cfg_.n; ++i)
                deliver(ProcessId{i});
        }
        else
        {
            for (auto to : o.to)
                deliver(to);
        }
    }

    void StreamletSystem::step()
    {
        std::vector<std::vector<StreamletMessage>> inbox(cfg_.n);
        while (!queue_.empty() && queue_.top().deliver_at <= now_)
        {
            inbox[queue_.top().to.value].push_back(queue_.top().msg);
            queue_.pop();
        }

        for (auto &node : nodes_)
        {
            if (crashed(node.id()))
                continue;
            auto out = node.tick(now_, inbox[node.id().value]);
            for (const auto &b : node.last_proposals())
            {
                history_.append_inv(node.id(), now_, b);
                history_.append_rsp(node.id(), now_, true);
            }
            for (const auto &o : out)
                send(node.id(), o);
        }

        for (const auto &node : nodes_)
        {
            if (!node.correct() || crashed(node.id()))
                continue;
            if ((now_ + read_offset_[node.id()]) % wl_.read_every == 0)
            {
                history_.read_inv(node.id(), now_);
                history_.read_rsp(node.id(), now_, node.finalized());
            }
        }
        ++now_;
    }

    void StreamletSystem::run_to_end()
    {
        while (!done())
            step();
    }

    StreamletRun StreamletSystem::finish() &&
    {
        StreamletRun run;
        for (const auto &[p, tag] : cfg_.byzantine)
            run.byzantine.insert(p);
        for (const auto &node : nodes_)
        {
            if (!node.correct())
                continue;
            run.finalized.emplace(node.id(), node.finalized());
            run.conflict_events[node.id()] = node.conflict_events();
            run.detections[node.id()] = node.detections();
        }
        for (const auto &d : deliveries_)
        {
            if (!d.correct_sender)
                continue;
            if (d.deliver_at > std::max(cfg_.gst, d.sent + cfg_.delta))
                ++run.delta_violations;
            if (d.deliver_at >= cfg_.horizon && d.sent + cfg_.delta < cfg_.horizon)
                ++run.undelivered_correct;
        }
        run.history = std::move(history_);
        run.deliveries = std::move(deliveries_);
        return run;
    }

    StreamletRun run_streamlet(const NetConfig &cfg, const StreamletWorkload &wl)
    {
        StreamletSystem sys(cfg, wl);
        sys.run_to_end();
        return std::move(sys).finish();
    }
}
