#include "btlab/ep_async.hpp"

#include "btlab/errors.hpp"

namespace btlab
{
    const char *to_string(EpBehavior b)
    {
        switch (b)
        {
        case EpBehavior::Correct:
            return "correct";
        case EpBehavior::ForkSpam:
            return "fork-spam";
        case EpBehavior::Grind:
            return "grind";
        case EpBehavior::Stale:
            return "stale";
        case EpBehavior::Silent:
            return "silent";
        }
        return "?";
    }

    std::optional<EpBehavior> ep_behavior_from_string(const std::string &s)
    {
        for (auto b : {EpBehavior::Correct, EpBehavior::ForkSpam, EpBehavior::Grind, EpBehavior::Stale,
                       EpBehavior::Silent})
        {
            if (s == to_string(b))
                return b;
        }
        return std::nullopt;
    }

    Bytes ep_payload(ProcessId p, std::uint64_t seq)
    {
        Bytes out = u64_payload(seq);
        auto tag = u64_payload(p.value);
        out.insert(out.end(), tag.begin(), tag.begin() + 4);
        return out;
    }

    bool ep_append(Oracle &oracle, History &h, ProcessId p, Tick now, Tick view_as_of, Bytes payload)
    {
        auto view = oracle.update_view(p, view_as_of);
        for (int attempt = 0;; ++attempt)
        {
            const Chain selected = f_lowest_id(view.tree);
            BlockPtr b = make_block(selected.tip(), p, 0, payload);
            try
            {
                const bool granted = oracle.get_valid_block(p, b->parent, b);
                h.append_inv(p, now, b);
                if (granted)
                    oracle.set_valid_block(p, b->parent, b);
                h.append_rsp(p, now, granted);
                return granted;
            }
            catch (const UnknownParent &)
            {
                if (attempt > 0)
                    throw;
                view = oracle.update_view(p, now);
            }
        }
    }

    Chain ep_read(Oracle &oracle, History *h, ProcessId p, Tick now, Tick view_as_of)
    {
        auto view = oracle.update_view(p, view_as_of);
        Chain bc = f_lowest_id(view.tree);
        if (h)
        {
            h->read_inv(p, now);
            h->read_rsp(p, now, bc);
        }
        return bc;
    }

    namespace
    {
        std::size_t offer(Oracle &oracle, History &h, ProcessId p, Tick now, const BlockPtr &b)
        {
            if (oracle.global().contains(b->id))
                return 0;
            const bool granted = oracle.get_valid_block(p, b->parent, b);
            h.append_inv(p, now, b);
            if (granted)
                oracle.set_valid_block(p, b->parent, b);
            h.append_rsp(p, now, granted);
            return granted ? 1 : 0;
        }
    }

    std::size_t ep_byzantine_step(Oracle &oracle, History &h, ProcessId p, EpBehavior behavior, Tick now,
                                  Tick view_as_of, Rng &rng, std::uint64_t &seq, const EpAttack &attack)
    {
        if (behavior == EpBehavior::Silent)
            return 0;
        if (behavior == EpBehavior::Correct)
            return ep_append(oracle, h, p, now, view_as_of, ep_payload(p, seq++)) ? 1 : 0;

        const auto view = oracle.update_view(p, view_as_of);
        const Chain main = f_lowest_id(view.tree);
        auto ancestor = [&](std::size_t depth) -> const Block & {
            depth = std::min(depth, main.size() - 1);
            return main[main.size() - 1 - depth];
        };

        std::size_t attached = 0;
        switch (behavior)
        {
        case EpBehavior::ForkSpam:
            for (std::size_t i = 0; i < attack.fork_width; ++i)
                attached += offer(oracle, h, p, now, make_block(main.tip(), p, 0, ep_payload(p, seq++)));
            break;
        case EpBehavior::Grind:
        {
            const Block &parent = ancestor(rng.uniform(0, attack.fork_depth));
            BlockPtr best;
            for (std::size_t i = 0; i < attack.grind_attempts; ++i)
            {
                auto b = make_block(parent, p, 0, ep_payload(p, seq++));
                if (!best || b->id < best->id)
                    best = b;
            }
            attached += offer(oracle, h, p, now, best);
            break;
        }
        case EpBehavior::Stale:
            attached += offer(oracle, h, p, now,
                              make_block(ancestor(rng.uniform(1, attack.fork_depth)), p, 0, ep_payload(p, seq++)));
            break;
        default:
            break;
        }
        return attached;
    }
}
