#include "btlab/reductions.hpp"

#include <set>

namespace btlab
{
    Chain apply_prune(const Chain &bc, const PruneMode &mode)
    {
        if (const auto *k = std::get_if<KnownDis>(&mode))
            return prune_last(bc, k->dis);
        return prune_half(bc);
    }

    History prune_reads(const History &h, const PruneMode &mode)
    {
        History out;
        for (Event e : h.events())
        {
            if (e.kind == EventKind::ReadRsp)
                e.chain = apply_prune(*e.chain, mode);
            out.record(std::move(e));
        }
        return out;
    }

    bool EcInstance::poll(const Chain &bc)
    {
        if (decision_ || bc.size() <= j_ || !p_ec_(bc))
            return false;
        decision_ = bc;
        return true;
    }

    namespace
    {
        Bytes ec_value(ProcessId p, std::size_t j)
        {
            Bytes v = u64_payload(j);
            auto tag = u64_payload(p.value);
            v.insert(v.end(), tag.begin(), tag.begin() + 4);
            v.push_back('E');
            v.push_back('C');
            return v;
        }
    }

    std::optional<std::size_t> smallest_agreement_index(const std::vector<EcDecision> &decisions,
                                                        const std::vector<ProcessId> &processes,
                                                        std::size_t instances)
    {
        std::map<std::size_t, std::map<ProcessId, BlockId>> by_instance;
        for (const auto &d : decisions)
            by_instance[d.instance].emplace(d.process, d.value->id);
        std::size_t k = 0;
        for (std::size_t j = 1; j <= instances; ++j)
        {
            const auto &got = by_instance[j];
            if (got.size() != processes.size())
                return std::nullopt;
            std::set<BlockId> values;
            for (const auto &[p, id] : got)
                values.insert(id);
            if (values.size() > 1)
                k = j;
        }
        return k;
    }

    EcRun run_ec(const NetConfig &cfg, const StreamletWorkload &wl, std::size_t instances, bool propose_invalid)
    {
        StreamletSystem sys(cfg, wl);
        const auto p_ec = standard_validity();
        const auto correct = cfg.correct_processes();

        EcRun run;
        run.instances = instances;
        std::map<ProcessId, EcInstance> current;
        std::set<std::pair<ProcessId, std::size_t>> seen;
        for (auto p : correct)
        {
            if (propose_invalid)
                sys.node(p).enqueue_payload(invalid_payload());
            if (instances > 0)
            {
                current.emplace(p, EcInstance(1, p_ec));
                sys.node(p).enqueue_payload(ec_value(p, 1));
            }
            run.decided_upto[p] = 0;
        }

        while (!sys.done() && !current.empty())
        {
            sys.step();
            for (auto it = current.begin(); it != current.end();)
            {
                const ProcessId p = it->first;
                EcInstance &inst = it->second;
                const Chain &bc = sys.node(p).finalized();
                bool erased = false;
                while (inst.poll(bc))
                {
                    const std::size_t j = inst.index();
                    EcDecision d{p, j, sys.now() - 1, *inst.decision(), inst.decision()->ptr(j)};
                    run.integrity = run.integrity && seen.insert({p, j}).second;
                    run.validity = run.validity && p_ec(d.chain) && standard_payload_ok(d.value->payload);
                    run.decisions.push_back(std::move(d));
                    run.decided_upto[p] = j;
                    if (j == instances)
                    {
                        it = current.erase(it);
                        erased = true;
                        break;
                    }
                    inst = EcInstance(j + 1, p_ec);
                    sys.node(p).enqueue_payload(ec_value(p, j + 1));
                }
                if (!erased)
                    ++it;
            }
        }

        run.smallest_k = smallest_agreement_index(run.decisions, correct, instances);
        run.base = std::move(sys).finish();
        return run;
    }
}
