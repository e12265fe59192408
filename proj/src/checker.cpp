#include "btlab/checker.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace btlab
{
    const char *to_string(Criterion c)
    {
        switch (c)
        {
        case Criterion::ChainValidity:
            return "ChainValidity";
        case Criterion::ChainIntegrity:
            return "ChainIntegrity";
        case Criterion::EventualPrefix:
            return "EventualPrefix";
        case Criterion::EverGrowingTree:
            return "EverGrowingTree";
        case Criterion::StrongPrefix:
            return "StrongPrefix";
        case Criterion::EventualStrongPrefix:
            return "EventualStrongPrefix";
        case Criterion::BoundedDisplacement:
            return "BoundedDisplacement";
        }
        return "?";
    }

    const char *to_string(Status s)
    {
        switch (s)
        {
        case Status::Pass:
            return "pass";
        case Status::Fail:
            return "fail";
        case Status::Inconclusive:
            return "inconclusive";
        case Status::Measured:
            return "measured";
        }
        return "?";
    }

    namespace
    {
        Verdict make(Criterion c, Status s) { return Verdict{c, s, std::nullopt}; }

        Verdict fail(Criterion c, std::vector<std::uint64_t> events, std::optional<std::size_t> pos, std::string note)
        {
            return Verdict{c, Status::Fail, Witness{std::move(events), pos, std::move(note)}};
        }

        const BlockId *id_at(const Chain &bc, std::size_t i)
        {
            const Block *b = bc.at(i);
            return b ? &b->id : nullptr;
        }

        bool same_at(const Chain &a, const Chain &b, std::size_t i)
        {
            const BlockId *x = id_at(a, i);
            const BlockId *y = id_at(b, i);
            if (!x || !y)
                return x == y;
            return *x == *y;
        }

        // A read too short to reach position i says nothing about it.
        bool agree_at(const Chain &a, const Chain &b, std::size_t i)
        {
            const BlockId *x = id_at(a, i);
            const BlockId *y = id_at(b, i);
            return !x || !y || *x == *y;
        }

        // Displacement that tolerates chains without a shared genesis (forged
        // traces): nothing short of the whole chain can be pruned then.
        std::size_t safe_displacement(const Chain &from, const Chain &to)
        {
            return from.size() - common_prefix_length(from, to);
        }
    }

    Verdict check_chain_validity(const History &h, const ValidityPredicate &valid)
    {
        for (const Event *r : h.reads_in_program_order())
        {
            if (!valid(*r->chain))
                return fail(Criterion::ChainValidity, {r->eid}, std::nullopt, "read returned a chain violating P");
        }
        return make(Criterion::ChainValidity, Status::Pass);
    }

    Verdict check_chain_integrity(const History &h)
    {
        // Once an append invocation precedes a read of process p it precedes every
        // later read of p, so each (block, reader) pair is settled once.
        std::set<std::pair<BlockId, ProcessId>> settled;
        const BlockId &genesis = genesis_block()->id;
        for (const Event *r : h.reads_in_program_order())
        {
            for (const auto &b : r->chain->blocks())
            {
                if (b->id == genesis)
                    continue;
                if (settled.count({b->id, r->process}))
                    continue;
                bool found = false;
                for (auto a : h.append_invocations(b->id))
                {
                    if (h.program_precedes(a, r->eid))
                    {
                        found = true;
                        break;
                    }
                }
                if (!found)
                {
                    return fail(Criterion::ChainIntegrity, {r->eid}, std::nullopt,
                                "block " + b->id.short_hex() + " returned without a preceding append");
                }
                settled.insert({b->id, r->process});
            }
        }
        return make(Criterion::ChainIntegrity, Status::Pass);
    }

    Verdict check_eventual_prefix(const History &h, double window, std::optional<Tick> horizon)
    {
        if (!(window > 0.0 && window < 1.0))
            throw std::invalid_argument("window must lie in (0, 1)");
        const auto reads = h.reads_in_program_order();
        if (reads.size() < 2)
            return make(Criterion::EventualPrefix, Status::Inconclusive);

        const double T = static_cast<double>(horizon.value_or(h.last_tick()));
        const double fill_before = window * T;
        const double late_from = (1.0 - (1.0 - window) / 2.0) * T;

        std::size_t filled = 0;
        std::vector<const Event *> late;
        for (const Event *r : reads)
        {
            if (static_cast<double>(r->tick) < fill_before)
                filled = std::max(filled, r->chain->size());
            if (static_cast<double>(r->tick) >= late_from)
                late.push_back(r);
        }
        if (late.empty())
            return make(Criterion::EventualPrefix, Status::Inconclusive);

        for (std::size_t i = 0; i < filled; ++i)
        {
            const Event *ref = nullptr;
            for (const Event *r : late)
            {
                if (!ref)
                {
                    if (r->chain->at(i))
                        ref = r;
                    continue;
                }
                if (!agree_at(*ref->chain, *r->chain, i))
                {
                    return fail(Criterion::EventualPrefix, {ref->eid, r->eid}, i,
                                "late reads disagree at a position filled early");
                }
            }
        }
        return make(Criterion::EventualPrefix, Status::Pass);
    }

    Verdict check_ever_growing_tree(const History &h, std::size_t k)
    {
        const Event *longest = nullptr;
        for (const Event *r : h.reads_in_program_order())
        {
            if (!longest || r->chain->size() > longest->chain->size())
                longest = r;
        }
        if (longest && length(*longest->chain) > k)
            return Verdict{Criterion::EverGrowingTree, Status::Pass, Witness{{longest->eid}, std::nullopt, ""}};
        if (!longest)
            return fail(Criterion::EverGrowingTree, {}, std::nullopt, "no reads");
        return fail(Criterion::EverGrowingTree, {longest->eid}, std::nullopt,
                    "longest read has length " + std::to_string(length(*longest->chain)) + " <= k = " +
                        std::to_string(k));
    }

    Verdict check_strong_prefix(const History &h)
    {
        // Pairwise comparability is equivalent to every read prefixing the longest.
        const auto reads = h.reads_in_program_order();
        const Event *longest = nullptr;
        for (const Event *r : reads)
        {
            if (!longest || r->chain->size() > longest->chain->size())
                longest = r;
        }
        for (const Event *r : reads)
        {
            if (!is_prefix(*r->chain, *longest->chain))
            {
                auto a = std::min(r->eid, longest->eid);
                auto b = std::max(r->eid, longest->eid);
                return fail(Criterion::StrongPrefix, {a, b}, common_prefix_length(*r->chain, *longest->chain),
                            "incomparable chains");
            }
        }
        return make(Criterion::StrongPrefix, Status::Pass);
    }

    namespace
    {
        struct EspScan
        {
            std::size_t cut = 0;
            // An incomparable pair straddling the cut, when cut > 0.
            std::optional<std::pair<std::uint64_t, std::uint64_t>> witness;
        };

        EspScan esp_scan(const std::vector<const Event *> &reads)
        {
            EspScan out;
            if (reads.empty())
                return out;
            // Scan backwards keeping the longest read of the comparable suffix.
            const Event *top = reads.back();
            std::size_t c = reads.size() - 1;
            while (c > 0)
            {
                const Event *r = reads[c - 1];
                if (is_prefix(*r->chain, *top->chain))
                {
                }
                else if (is_prefix(*top->chain, *r->chain))
                {
                    top = r;
                }
                else
                {
                    out.witness = std::make_pair(r->eid, top->eid);
                    break;
                }
                --c;
            }
            out.cut = c;
            return out;
        }
    }

    std::optional<std::size_t> min_esp_cut(const History &h)
    {
        const auto reads = h.reads_in_program_order();
        if (reads.size() < 2)
            return std::nullopt;
        return esp_scan(reads).cut;
    }

    Verdict check_eventual_strong_prefix(const History &h, double cut_fraction)
    {
        const auto reads = h.reads_in_program_order();
        if (reads.size() < 2)
            return make(Criterion::EventualStrongPrefix, Status::Inconclusive);
        const auto scan = esp_scan(reads);
        if (static_cast<double>(scan.cut) <= cut_fraction * static_cast<double>(reads.size()))
            return make(Criterion::EventualStrongPrefix, Status::Pass);
        return fail(Criterion::EventualStrongPrefix, {scan.witness->first, scan.witness->second}, scan.cut,
                    "comparable suffix starts at read " + std::to_string(scan.cut) + " of " +
                        std::to_string(reads.size()));
    }

    DisplacementReport measure_displacement(const History &h)
    {
        DisplacementReport out;
        const auto reads = h.reads_in_program_order();
        const std::size_t half = reads.size() / 2;
        for (std::size_t i = 0; i < reads.size(); ++i)
        {
            const Chain &from = *reads[i]->chain;
            for (std::size_t j = i + 1; j < reads.size(); ++j)
            {
                const std::size_t d = safe_displacement(from, *reads[j]->chain);
                if (d > out.max)
                {
                    out.max = d;
                    out.argmax = std::make_pair(reads[i]->eid, reads[j]->eid);
                }
                if (j < half && d > out.first_half_max)
                    out.first_half_max = d;
            }
        }
        out.plateau = out.first_half_max == out.max;
        return out;
    }

    Verdict bounded_displacement_verdict(const DisplacementReport &d)
    {
        Witness w;
        if (d.argmax)
            w.events = {d.argmax->first, d.argmax->second};
        w.note = "max displacement " + std::to_string(d.max) + (d.plateau ? " (plateau)" : " (still growing)");
        return Verdict{Criterion::BoundedDisplacement, Status::Measured, std::move(w)};
    }

    std::map<std::size_t, std::size_t> churn(const History &h)
    {
        std::map<ProcessId, const Chain *> last;
        std::map<ProcessId, std::map<std::size_t, std::size_t>> per_process;
        std::map<std::size_t, std::size_t> out;
        for (const Event *r : h.reads_in_program_order())
        {
            const Chain &now = *r->chain;
            auto &counts = per_process[r->process];
            auto it = last.find(r->process);
            if (it != last.end())
            {
                const Chain &prev = *it->second;
                const std::size_t lcp = common_prefix_length(prev, now);
                // Positions past the common prefix where the previous read had a
                // value and the new one differs.
                for (std::size_t i = lcp; i < prev.size(); ++i)
                {
                    if (!same_at(prev, now, i))
                        ++counts[i];
                }
            }
            last[r->process] = &now;
        }
        for (const auto &[p, counts] : per_process)
        {
            for (const auto &[pos, n] : counts)
                out[pos] = std::max(out[pos], n);
        }
        return out;
    }

    std::vector<std::pair<Tick, std::size_t>> common_prefix_series(const History &h)
    {
        std::map<ProcessId, const Chain *> latest;
        std::vector<std::pair<Tick, std::size_t>> out;
        for (const Event *r : h.reads_in_program_order())
        {
            latest[r->process] = &*r->chain;
            std::size_t lcp = r->chain->size();
            for (const auto &[p, bc] : latest)
                lcp = std::min(lcp, common_prefix_length(*bc, *r->chain));
            if (!out.empty() && out.back().first == r->tick)
                out.back().second = lcp;
            else
                out.emplace_back(r->tick, lcp);
        }
        return out;
    }

    const Verdict &Report::verdict(Criterion c) const
    {
        for (const auto &v : verdicts)
        {
            if (v.criterion == c)
                return v;
        }
        throw std::out_of_range(std::string("no verdict for ") + to_string(c));
    }

    Report run_all(const History &h, CheckConfig cfg)
    {
        Report rep;
        if (!cfg.validity)
            cfg.validity = standard_validity();
        rep.k_used = cfg.k.value_or(h.successful_appends() / 2);
        rep.verdicts.push_back(check_chain_validity(h, cfg.validity));
        rep.verdicts.push_back(check_chain_integrity(h));
        rep.verdicts.push_back(check_eventual_prefix(h, cfg.window, cfg.horizon));
        rep.verdicts.push_back(check_ever_growing_tree(h, rep.k_used));
        rep.verdicts.push_back(check_strong_prefix(h));
        rep.verdicts.push_back(check_eventual_strong_prefix(h, cfg.cut_fraction));
        const auto disp = measure_displacement(h);
        rep.verdicts.push_back(bounded_displacement_verdict(disp));

        rep.metrics.churn = churn(h);
        rep.metrics.max_displacement = disp.max;
        rep.metrics.displacement_plateau = disp.plateau;
        rep.metrics.common_prefix_series = common_prefix_series(h);
        rep.metrics.min_esp_cut = min_esp_cut(h);
        rep.config = std::move(cfg);
        return rep;
    }

    bool lattice_consistent(const Report &r)
    {
        const auto sp = r.verdict(Criterion::StrongPrefix).status;
        const auto esp = r.verdict(Criterion::EventualStrongPrefix).status;
        const auto ep = r.verdict(Criterion::EventualPrefix).status;
        if (sp == Status::Pass && esp == Status::Fail)
            return false;
        if (esp == Status::Pass && ep == Status::Fail)
            return false;
        return true;
    }
}
