#pragma once

#include "btlab/block.hpp"
#include "btlab/chain.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

namespace btlab
{
    enum class EventKind : std::uint8_t
    {
        AppendInv,
        AppendRsp,
        ReadInv,
        ReadRsp,
    };

    const char *to_string(EventKind kind);
    std::optional<EventKind> event_kind_from_string(std::string_view s);

    inline bool is_invocation(EventKind k) { return k == EventKind::AppendInv || k == EventKind::ReadInv; }

    struct Event
    {
        std::uint64_t eid = 0;
        ProcessId process;
        EventKind kind = EventKind::ReadInv;
        Tick tick = 0;
        BlockPtr block;             // AppendInv
        bool ack = false;           // AppendRsp
        std::optional<Chain> chain; // ReadRsp
    };

    /// Event log of append/read invocations and responses.
    ///
    /// Derived relations:
    ///  - process order: same process, smaller eid;
    ///  - operation order: a response at tick t precedes an invocation at tick t' > t;
    ///  - program order: the transitive closure of the two.
    /// The eid order refines program order and serves as the linearization used
    /// by the checker for "subsequent" reads.
    class History
    {
    public:
        /// Validates and appends; e.eid is assigned. Throws HistoryError for an
        /// orphan or mismatched response, a response earlier than its invocation,
        /// overlapping operations on one process, or a tick regression.
        std::uint64_t record(Event e);

        std::uint64_t append_inv(ProcessId p, Tick t, BlockPtr b);
        std::uint64_t append_rsp(ProcessId p, Tick t, bool ack);
        std::uint64_t read_inv(ProcessId p, Tick t);
        std::uint64_t read_rsp(ProcessId p, Tick t, Chain bc);

        const std::vector<Event> &events() const noexcept { return events_; }
        const Event &event(std::uint64_t eid) const { return events_.at(eid); }
        std::size_t size() const noexcept { return events_.size(); }

        /// Read responses in eid order, optionally for one process.
        std::vector<const Event *> reads_in_program_order(std::optional<ProcessId> process = std::nullopt) const;

        /// AppendInv eids that carry block id.
        const std::vector<std::uint64_t> &append_invocations(const BlockId &id) const;

        /// Eid of the invocation answered by response rsp.
        std::uint64_t invocation_of(std::uint64_t rsp) const { return matched_inv_.at(rsp); }

        bool process_precedes(std::uint64_t a, std::uint64_t b) const;
        bool operation_precedes(std::uint64_t a, std::uint64_t b) const;
        bool program_precedes(std::uint64_t a, std::uint64_t b) const;

        std::vector<ProcessId> processes() const;
        Tick last_tick() const noexcept { return events_.empty() ? 0 : max_tick_; }

        /// Successful AppendRsp count, optionally restricted to some processes.
        std::size_t successful_appends(const std::vector<ProcessId> *only = nullptr) const;

    private:
        static constexpr Tick kNever = std::numeric_limits<Tick>::max();

        struct ProcessState
        {
            std::optional<std::uint64_t> pending; // open invocation eid
            Tick last_tick = 0;
            bool any = false;
            std::optional<Tick> last_inv_tick;
            std::vector<std::uint64_t> awaiting_rsp; // eids with no later response yet
        };

        std::vector<Event> events_;
        std::vector<std::uint64_t> matched_inv_;
        // Closure helpers, maintained on record().
        std::vector<Tick> first_rsp_tick_from_;             // earliest response at/after e on its process
        std::vector<std::optional<Tick>> last_inv_tick_upto_; // latest invocation at/before e on its process
        std::map<ProcessId, ProcessState> procs_;
        std::unordered_map<BlockId, std::vector<std::uint64_t>, BlockIdHash> appends_by_block_;
        Tick max_tick_ = 0;
    };
}
