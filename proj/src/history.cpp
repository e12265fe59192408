#include "btlab/history.hpp"

#include "btlab/errors.hpp"

#include <string>

namespace btlab
{
    const char *to_string(EventKind kind)
    {
        switch (kind)
        {
        case EventKind::AppendInv:
            return "append_inv";
        case EventKind::AppendRsp:
            return "append_rsp";
        case EventKind::ReadInv:
            return "read_inv";
        case EventKind::ReadRsp:
            return "read_rsp";
        }
        return "?";
    }

    std::optional<EventKind> event_kind_from_string(std::string_view s)
    {
        if (s == "append_inv")
            return EventKind::AppendInv;
        if (s == "append_rsp")
            return EventKind::AppendRsp;
        if (s == "read_inv")
            return EventKind::ReadInv;
        if (s == "read_rsp")
            return EventKind::ReadRsp;
        return std::nullopt;
    }

    std::uint64_t History::record(Event e)
    {
        auto &ps = procs_[e.process];
        if (ps.any && e.tick < ps.last_tick)
            throw HistoryError("tick regression on process " + std::to_string(e.process.value));

        std::uint64_t matched = 0;
        if (is_invocation(e.kind))
        {
            if (ps.pending)
                throw HistoryError("process " + std::to_string(e.process.value) + " invoked with an open operation");
            if (e.kind == EventKind::AppendInv && !e.block)
                throw HistoryError("append invocation without a block");
        }
        else
        {
            if (!ps.pending)
                throw HistoryError("orphan response on process " + std::to_string(e.process.value));
            const Event &inv = events_[*ps.pending];
            const bool kinds_match = (inv.kind == EventKind::AppendInv && e.kind == EventKind::AppendRsp) ||
                                     (inv.kind == EventKind::ReadInv && e.kind == EventKind::ReadRsp);
            if (!kinds_match)
                throw HistoryError("response does not match the open invocation");
            if (e.tick < inv.tick)
                throw HistoryError("response before its invocation");
            if (e.kind == EventKind::ReadRsp && !e.chain)
                throw HistoryError("read response without a chain");
            matched = *ps.pending;
        }

        e.eid = events_.size();
        const std::uint64_t eid = e.eid;
        ps.any = true;
        ps.last_tick = e.tick;
        if (e.tick > max_tick_)
            max_tick_ = e.tick;

        first_rsp_tick_from_.push_back(kNever);
        ps.awaiting_rsp.push_back(eid);
        if (is_invocation(e.kind))
        {
            ps.pending = eid;
            ps.last_inv_tick = e.tick;
            matched_inv_.push_back(eid);
            if (e.kind == EventKind::AppendInv)
                appends_by_block_[e.block->id].push_back(eid);
        }
        else
        {
            ps.pending.reset();
            matched_inv_.push_back(matched);
            for (auto waiting : ps.awaiting_rsp)
                first_rsp_tick_from_[waiting] = e.tick;
            ps.awaiting_rsp.clear();
        }
        last_inv_tick_upto_.push_back(ps.last_inv_tick);
        events_.push_back(std::move(e));
        return eid;
    }

    std::uint64_t History::append_inv(ProcessId p, Tick t, BlockPtr b)
    {
        Event e;
        e.process = p;
        e.kind = EventKind::AppendInv;
        e.tick = t;
        e.block = std::move(b);
        return record(std::move(e));
    }

    std::uint64_t History::append_rsp(ProcessId p, Tick t, bool ack)
    {
        Event e;
        e.process = p;
        e.kind = EventKind::AppendRsp;
        e.tick = t;
        e.ack = ack;
        return record(std::move(e));
    }

    std::uint64_t History::read_inv(ProcessId p, Tick t)
    {
        Event e;
        e.process = p;
        e.kind = EventKind::ReadInv;
        e.tick = t;
        return record(std::move(e));
    }

    std::uint64_t History::read_rsp(ProcessId p, Tick t, Chain bc)
    {
        Event e;
        e.process = p;
        e.kind = EventKind::ReadRsp;
        e.tick = t;
        e.chain = std::move(bc);
        return record(std::move(e));
    }

    std::vector<const Event *> History::reads_in_program_order(std::optional<ProcessId> process) const
    {
        std::vector<const Event *> out;
        for (const auto &e : events_)
        {
            if (e.kind != EventKind::ReadRsp)
                continue;
            if (process && e.process != *process)
                continue;
            out.push_back(&e);
        }
        return out;
    }

    const std::vector<std::uint64_t> &History::append_invocations(const BlockId &id) const
    {
        static const std::vector<std::uint64_t> kNone;
        auto it = appends_by_block_.find(id);
        return it == appends_by_block_.end() ? kNone : it->second;
    }

    bool History::process_precedes(std::uint64_t a, std::uint64_t b) const
    {
        return a < b && events_.at(a).process == events_.at(b).process;
    }

    bool History::operation_precedes(std::uint64_t a, std::uint64_t b) const
    {
        const Event &ea = events_.at(a);
        const Event &eb = events_.at(b);
        return !is_invocation(ea.kind) && is_invocation(eb.kind) && ea.tick < eb.tick;
    }

    bool History::program_precedes(std::uint64_t a, std::uint64_t b) const
    {
        if (a == b)
            return false;
        if (process_precedes(a, b))
            return true;
        // Any path alternates process-order runs with response-to-invocation hops
        // along non-decreasing ticks, so it collapses to one hop from the first
        // response at/after a to the last invocation at/before b.
        const auto &inv = last_inv_tick_upto_.at(b);
        return inv && first_rsp_tick_from_.at(a) < *inv;
    }

    std::vector<ProcessId> History::processes() const
    {
        std::vector<ProcessId> out;
        for (const auto &[p, state] : procs_)
            out.push_back(p);
        return out;
    }

    std::size_t History::successful_appends(const std::vector<ProcessId> *only) const
    {
        std::size_t n = 0;
        for (const auto &e : events_)
        {
            if (e.kind != EventKind::AppendRsp || !e.ack)
                continue;
            if (only)
            {
                bool found = false;
                for (auto p : *only)
                    found = found || p == e.process;
                if (!found)
                    continue;
            }
            ++n;
        }
        return n;
    }
}
