#pragma once

#include "btlab/history.hpp"
#include "btlab/oracle.hpp"
#include "btlab/rng.hpp"

#include <optional>
#include <string>
#include <vector>

namespace btlab
{
    enum class EpBehavior
    {
        Correct,
        ForkSpam, // several children under the tip of its view
        Grind,    // searches nonces for a low id under a recent ancestor
        Stale,    // appends under a random recent ancestor
        Silent,
    };

    const char *to_string(EpBehavior b);
    std::optional<EpBehavior> ep_behavior_from_string(const std::string &s);

    /// Append procedure over the oracle: refresh the view, select
    /// last_block(f_lowest_id(view)) and mint the block there; set it if the
    /// oracle grants it. A stale-parent error refreshes the view once.
    /// Records the invocation and response in h.
    bool ep_append(Oracle &oracle, History &h, ProcessId p, Tick now, Tick view_as_of, Bytes payload);

    /// Read procedure: f_lowest_id of a refreshed view. Recorded when h is given.
    Chain ep_read(Oracle &oracle, History *h, ProcessId p, Tick now, Tick view_as_of);

    struct EpAttack
    {
        std::size_t fork_width = 3;
        std::size_t fork_depth = 3;
        std::size_t grind_attempts = 16;
    };

    /// One adversarial step for a Byzantine appender. Every block it hands to the
    /// oracle is recorded as an append. Returns the number of blocks attached.
    std::size_t ep_byzantine_step(Oracle &oracle, History &h, ProcessId p, EpBehavior behavior, Tick now,
                                  Tick view_as_of, Rng &rng, std::uint64_t &seq, const EpAttack &attack);

    /// Unique payload for the seq-th append of process p.
    Bytes ep_payload(ProcessId p, std::uint64_t seq);
}
