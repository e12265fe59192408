#pragma once

// Straight-from-the-definition evaluators used as test oracles. Deliberately
// naive: explicit closures, all pairs, exhaustive enumeration.

#include "btlab/blocktree.hpp"
#include "btlab/checker.hpp"
#include "btlab/history.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace bf
{
    using namespace btlab;

    inline std::vector<BlockId> ids(const Chain &bc)
    {
        std::vector<BlockId> out;
        for (const auto &b : bc.blocks())
            out.push_back(b->id);
        return out;
    }

    inline bool prefix_of(const std::vector<BlockId> &a, const std::vector<BlockId> &b)
    {
        if (a.size() > b.size())
            return false;
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            if (a[i] != b[i])
                return false;
        }
        return true;
    }

    inline bool comparable(const Chain &a, const Chain &b)
    {
        const auto x = ids(a), y = ids(b);
        return prefix_of(x, y) || prefix_of(y, x);
    }

    inline std::optional<BlockId> value_at(const Chain &bc, std::size_t i)
    {
        if (i < bc.size())
            return bc[i].id;
        return std::nullopt;
    }

    inline std::vector<const Event *> reads(const History &h)
    {
        std::vector<const Event *> out;
        for (const auto &e : h.events())
        {
            if (e.kind == EventKind::ReadRsp)
                out.push_back(&e);
        }
        return out;
    }

    /// Reflexive-free transitive closure of process order and operation order.
    inline std::vector<std::vector<bool>> program_order(const History &h)
    {
        const std::size_t n = h.size();
        std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
        const auto &ev = h.events();
        for (std::size_t a = 0; a < n; ++a)
        {
            for (std::size_t b = 0; b < n; ++b)
            {
                if (a < b && ev[a].process == ev[b].process)
                    r[a][b] = true;
                if (!is_invocation(ev[a].kind) && is_invocation(ev[b].kind) && ev[a].tick < ev[b].tick)
                    r[a][b] = true;
            }
        }
        for (std::size_t k = 0; k < n; ++k)
        {
            for (std::size_t i = 0; i < n; ++i)
            {
                if (!r[i][k])
                    continue;
                for (std::size_t j = 0; j < n; ++j)
                {
                    if (r[k][j])
                        r[i][j] = true;
                }
            }
        }
        return r;
    }

    inline bool validity(const History &h, const ValidityPredicate &valid)
    {
        for (const Event *r : reads(h))
        {
            if (!valid(*r->chain))
                return false;
        }
        return true;
    }

    inline bool integrity(const History &h)
    {
        const auto po = program_order(h);
        for (const Event *r : reads(h))
        {
            for (const auto &b : r->chain->blocks())
            {
                if (b->id == genesis_block()->id)
                    continue;
                bool ok = false;
                for (const auto &e : h.events())
                {
                    if (e.kind == EventKind::AppendInv && e.block->id == b->id && po[e.eid][r->eid])
                        ok = true;
                }
                if (!ok)
                    return false;
            }
        }
        return true;
    }

    inline Status eventual_prefix(const History &h, double window, std::optional<Tick> horizon = std::nullopt)
    {
        const auto rs = reads(h);
        if (rs.size() < 2)
            return Status::Inconclusive;
        Tick T = 0;
        for (const auto &e : h.events())
            T = std::max(T, e.tick);
        const double t = static_cast<double>(horizon.value_or(T));
        std::set<std::size_t> filled;
        std::vector<const Event *> late;
        for (const Event *r : rs)
        {
            if (static_cast<double>(r->tick) < window * t)
            {
                for (std::size_t i = 0; i < r->chain->size(); ++i)
                    filled.insert(i);
            }
            if (static_cast<double>(r->tick) >= (1.0 - (1.0 - window) / 2.0) * t)
                late.push_back(r);
        }
        if (late.empty())
            return Status::Inconclusive;
        for (auto i : filled)
        {
            for (const Event *a : late)
            {
                for (const Event *b : late)
                {
                    const auto x = value_at(*a->chain, i), y = value_at(*b->chain, i);
                    if (x && y && *x != *y)
                        return Status::Fail;
                }
            }
        }
        return Status::Pass;
    }

    inline bool ever_growing(const History &h, std::size_t k)
    {
        for (const Event *r : reads(h))
        {
            if (r->chain->size() > k)
                return true;
        }
        return false;
    }

    inline bool strong_prefix(const History &h)
    {
        const auto rs = reads(h);
        for (const Event *a : rs)
        {
            for (const Event *b : rs)
            {
                if (!bf::comparable(*a->chain, *b->chain))
                    return false;
            }
        }
        return true;
    }

    /// Smallest c such that all reads with index >= c are pairwise comparable.
    inline std::optional<std::size_t> esp_cut(const History &h)
    {
        const auto rs = reads(h);
        if (rs.size() < 2)
            return std::nullopt;
        for (std::size_t c = 0; c < rs.size(); ++c)
        {
            bool ok = true;
            for (std::size_t i = c; i < rs.size() && ok; ++i)
            {
                for (std::size_t j = c; j < rs.size() && ok; ++j)
                    ok = bf::comparable(*rs[i]->chain, *rs[j]->chain);
            }
            if (ok)
                return c;
        }
        return rs.size();
    }

    inline Status eventual_strong_prefix(const History &h, double cut_fraction)
    {
        const auto c = esp_cut(h);
        if (!c)
            return Status::Inconclusive;
        return static_cast<double>(*c) <= cut_fraction * static_cast<double>(reads(h).size()) ? Status::Pass
                                                                                               : Status::Fail;
    }

    /// Minimal d such that dropping d trailing blocks of from (never genesis)
    /// leaves a prefix of to; from.size() when even genesis disagrees.
    inline std::size_t displacement(const Chain &from, const Chain &to)
    {
        const auto x = ids(from), y = ids(to);
        for (std::size_t d = 0; d < x.size(); ++d)
        {
            std::vector<BlockId> kept(x.begin(), x.end() - static_cast<std::ptrdiff_t>(d));
            if (prefix_of(kept, y))
                return d;
        }
        return x.size();
    }

    inline std::size_t max_displacement(const History &h)
    {
        const auto rs = reads(h);
        std::size_t best = 0;
        for (std::size_t i = 0; i < rs.size(); ++i)
        {
            for (std::size_t j = i + 1; j < rs.size(); ++j)
                best = std::max(best, bf::displacement(*rs[i]->chain, *rs[j]->chain));
        }
        return best;
    }

    inline std::map<std::size_t, std::size_t> churn(const History &h)
    {
        std::map<ProcessId, std::vector<const Event *>> by_proc;
        for (const Event *r : reads(h))
            by_proc[r->process].push_back(r);
        std::map<std::size_t, std::size_t> out;
        for (const auto &[p, rs] : by_proc)
        {
            std::map<std::size_t, std::size_t> counts;
            for (std::size_t k = 1; k < rs.size(); ++k)
            {
                const Chain &prev = *rs[k - 1]->chain;
                const Chain &now = *rs[k]->chain;
                for (std::size_t i = 0; i < prev.size(); ++i)
                {
                    if (value_at(prev, i) != value_at(now, i))
                        ++counts[i];
                }
            }
            for (const auto &[i, n] : counts)
                out[i] = std::max(out[i], n);
        }
        return out;
    }

    inline std::vector<std::vector<BlockPtr>> all_paths(const Blocktree &bt)
    {
        std::vector<std::vector<BlockPtr>> out;
        std::vector<BlockPtr> cur{genesis_block()};
        auto rec = [&](auto &&self) -> void {
            auto kids = bt.children(cur.back()->id);
            if (kids.empty())
            {
                out.push_back(cur);
                return;
            }
            for (auto &k : kids)
            {
                cur.push_back(k);
                self(self);
                cur.pop_back();
            }
        };
        rec(rec);
        return out;
    }

    /// Heaviest root-to-leaf path; ties go to the smaller leaf id.
    inline std::vector<BlockId> longest(const Blocktree &bt, const BlockWeight &w = unit_weight)
    {
        std::vector<BlockPtr> best;
        std::uint64_t best_len = 0;
        for (const auto &path : all_paths(bt))
        {
            std::uint64_t len = 0;
            for (const auto &b : path)
                len += w(*b);
            if (best.empty() || len > best_len || (len == best_len && path.back()->id < best.back()->id))
            {
                best = path;
                best_len = len;
            }
        }
        std::vector<BlockId> out;
        for (const auto &b : best)
            out.push_back(b->id);
        return out;
    }

    /// Lexicographically smallest id sequence among maximal paths that only use,
    /// at each fork, the earliest child of its creator.
    inline std::vector<BlockId> lowest_id(const Blocktree &bt)
    {
        auto eligible = [&](const BlockPtr &parent) {
            auto kids = bt.children(parent->id);
            std::vector<BlockPtr> keep;
            for (std::size_t i = 0; i < kids.size(); ++i)
            {
                bool first = true;
                for (std::size_t j = 0; j < kids.size(); ++j)
                {
                    if (j == i || kids[j]->creator != kids[i]->creator)
                        continue;
                    const auto ti = *bt.created_at(kids[i]->id), tj = *bt.created_at(kids[j]->id);
                    if (tj < ti || (tj == ti && j < i))
                        first = false;
                }
                if (first)
                    keep.push_back(kids[i]);
            }
            return keep;
        };
        std::optional<std::vector<BlockId>> best;
        std::vector<BlockPtr> cur{genesis_block()};
        auto rec = [&](auto &&self) -> void {
            auto kids = eligible(cur.back());
            if (kids.empty())
            {
                std::vector<BlockId> p;
                for (const auto &b : cur)
                    p.push_back(b->id);
                if (!best || p < *best)
                    best = p;
                return;
            }
            for (auto &k : kids)
            {
                cur.push_back(k);
                self(self);
                cur.pop_back();
            }
        };
        rec(rec);
        return *best;
    }

    struct RandomHistory
    {
        History history;
        Blocktree tree; // every block that may appear, appended or not
    };

    /// Up to max_reads reads over up to three processes, with chains of at most
    /// max_chain blocks drawn from a random tree. Some reads return blocks that
    /// were never appended, some blocks carry the invalid payload tag, and ticks
    /// repeat often so operation order is sparse.
    inline RandomHistory random_history(std::mt19937_64 &rng, std::size_t max_reads = 8, std::size_t max_chain = 8)
    {
        auto pick = [&](std::size_t lo, std::size_t hi) {
            return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
        };
        RandomHistory out;
        const std::size_t procs = pick(1, 3);
        const std::size_t nblocks = pick(0, 9);
        std::vector<BlockPtr> pool{genesis_block()};
        for (std::size_t i = 0; i < nblocks; ++i)
        {
            BlockPtr parent;
            do
                parent = pool[pick(0, pool.size() - 1)];
            while (parent->height + 2 > max_chain);
            Bytes payload = u64_payload(i);
            if (pick(0, 19) == 0)
                payload.insert(payload.begin(), invalid_payload_tag().begin(), invalid_payload_tag().end());
            auto b = make_block(*parent, ProcessId{static_cast<std::uint32_t>(pick(0, procs - 1))}, 0, payload);
            out.tree = out.tree.attach(b);
            pool.push_back(b);
        }

        const std::size_t target = pick(0, max_reads);
        std::size_t nreads = 0;
        Tick now = 0;
        std::vector<std::optional<EventKind>> open(procs);
        std::set<BlockId> used;
        for (std::size_t step = 0; step < 60; ++step)
        {
            now += pick(0, 2);
            const ProcessId p{static_cast<std::uint32_t>(pick(0, procs - 1))};
            auto &o = open[p.value];
            if (o)
            {
                if (*o == EventKind::AppendInv)
                    out.history.append_rsp(p, now, pick(0, 1) == 1);
                else
                    out.history.read_rsp(p, now, out.tree.chain_to(pool[pick(0, pool.size() - 1)]->id));
                o.reset();
            }
            else if (nreads < target && (pool.size() == 1 || pick(0, 1) == 0))
            {
                out.history.read_inv(p, now);
                o = EventKind::ReadInv;
                ++nreads;
            }
            else if (pool.size() > 1 && used.size() + 1 < pool.size())
            {
                BlockPtr b;
                do
                    b = pool[pick(1, pool.size() - 1)];
                while (used.count(b->id));
                used.insert(b->id);
                out.history.append_inv(p, now, b);
                o = EventKind::AppendInv;
            }
        }
        for (std::size_t i = 0; i < procs; ++i)
        {
            const ProcessId p{static_cast<std::uint32_t>(i)};
            if (!open[i])
                continue;
            now += pick(0, 1);
            if (*open[i] == EventKind::AppendInv)
                out.history.append_rsp(p, now, true);
            else
                out.history.read_rsp(p, now, out.tree.chain_to(pool[pick(0, pool.size() - 1)]->id));
        }
        return out;
    }

    /// Names of the checker outputs that disagree with the evaluators above.
    inline std::vector<std::string> mismatches(const History &h, double window, double cut, std::size_t k)
    {
        static const auto valid = standard_validity();
        std::vector<std::string> out;
        auto expect = [&](bool same, const char *what) {
            if (!same)
                out.emplace_back(what);
        };
        expect(check_chain_validity(h, valid).pass() == validity(h, valid), "validity");
        expect(check_chain_integrity(h).pass() == integrity(h), "integrity");
        expect(check_eventual_prefix(h, window).status == eventual_prefix(h, window), "eventual-prefix");
        expect(check_ever_growing_tree(h, k).pass() == ever_growing(h, k), "ever-growing");
        expect(check_strong_prefix(h).pass() == strong_prefix(h), "strong-prefix");
        expect(min_esp_cut(h) == esp_cut(h), "esp-cut");
        expect(check_eventual_strong_prefix(h, cut).status == eventual_strong_prefix(h, cut), "eventual-strong-prefix");
        expect(measure_displacement(h).max == max_displacement(h), "displacement");
        expect(bf::churn(h) == btlab::churn(h), "churn");
        return out;
    }
}
