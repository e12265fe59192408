#pragma once

#include "btlab/history.hpp"
#include "btlab/oracle.hpp"

#include <vector>

namespace btlab
{
    /// Block weight used by the longest-chain race: the first eight payload bytes
    /// (little endian), and 1 for genesis or short payloads.
    std::uint64_t race_weight(const Block &b);
    /// f_longest under race_weight.
    Chain race_select(const Blocktree &bt);

    struct LeadChange
    {
        std::size_t round = 0;
        Tick tick = 0;
        ProcessId leader;
        std::uint64_t leader_before = 0; // leader's branch length just before the overtaking set
        std::uint64_t leader_after = 0;
        std::uint64_t other = 0;
    };

    struct CounterexampleRun
    {
        History history;
        Blocktree tree;
        std::vector<LeadChange> lead_changes;
        std::vector<AuditEntry> audit;
        // The two appenders and the observer that reads after every step.
        ProcessId p1{0}, p2{1}, observer{2};
        BlockId first_block_1, first_block_2;
    };

    /// Scripted two-appender race under Theta_{F,2} with f_a = f_r = race_select.
    /// Phase j lets the leading process append h_targets[j % size] blocks while the
    /// other waits with a granted block whose weight is fixed so that setting it
    /// overtakes. Stops after `rounds` lead changes. Throws ConfigError for
    /// rounds < 1 or an empty/zero entry in h_targets.
    CounterexampleRun run_counterexample(const std::vector<std::size_t> &h_targets, std::size_t rounds,
                                         std::uint64_t seed);
}
