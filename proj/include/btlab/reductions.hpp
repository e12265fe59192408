#pragma once

#include "btlab/history.hpp"
#include "btlab/sim.hpp"

#include <functional>
#include <map>
#include <optional>
#include <variant>
#include <vector>

namespace btlab
{
    struct KnownDis
    {
        std::size_t dis = 0;
    };
    struct Half
    {
    };
    using PruneMode = std::variant<KnownDis, Half>;

    Chain apply_prune(const Chain &bc, const PruneMode &mode);

    /// Read wrapper over a base protocol's read operation.
    class PrunedReader
    {
    public:
        PrunedReader(std::function<Chain()> base_read, PruneMode mode)
            : base_(std::move(base_read)), mode_(mode)
        {
        }

        Chain read() const { return apply_prune(base_(), mode_); }
        const PruneMode &mode() const noexcept { return mode_; }

    private:
        std::function<Chain()> base_;
        PruneMode mode_;
    };

    /// The same history with every read response pruned; invocations, appends and
    /// ticks are unchanged.
    History prune_reads(const History &h, const PruneMode &mode);

    struct EcDecision
    {
        ProcessId process;
        std::size_t instance = 0;
        Tick tick = 0;
        Chain chain;    // the decision
        BlockPtr value; // chain[instance]
    };

    struct EcRun
    {
        StreamletRun base;
        std::vector<EcDecision> decisions;
        std::size_t instances = 0;
        // Per process, the highest instance decided.
        std::map<ProcessId, std::size_t> decided_upto;
        bool integrity = true; // one decision per (process, instance)
        bool validity = true;  // every decision satisfies P_EC
        // Smallest k with agreement on every instance above k, when every
        // instance was decided by all correct processes.
        std::optional<std::size_t> smallest_k;
    };

    /// One Eventual Consensus instance per process: propose_ec appends the value
    /// through the base protocol, then polls reads every tick until position j
    /// is filled. The decision is the chain and its value is chain[j].
    class EcInstance
    {
    public:
        EcInstance(std::size_t j, ValidityPredicate p_ec) : j_(j), p_ec_(std::move(p_ec)) {}

        std::size_t index() const noexcept { return j_; }
        bool decided() const noexcept { return decision_.has_value(); }
        const std::optional<Chain> &decision() const noexcept { return decision_; }

        /// Offers one polled read; returns true when it decides the instance.
        bool poll(const Chain &bc);

    private:
        std::size_t j_;
        ValidityPredicate p_ec_;
        std::optional<Chain> decision_;
    };

    /// Runs `instances` sequential EC instances at every correct process over the
    /// modified Streamlet protocol, stopping early once all are decided. With
    /// propose_invalid, each process first proposes a value violating P_EC.
    EcRun run_ec(const NetConfig &cfg, const StreamletWorkload &wl, std::size_t instances,
                 bool propose_invalid = false);

    /// Largest instance on which two processes decided differently, 0 when all
    /// agree; nullopt when some process left an instance undecided.
    std::optional<std::size_t> smallest_agreement_index(const std::vector<EcDecision> &decisions,
                                                        const std::vector<ProcessId> &processes,
                                                        std::size_t instances);
}
