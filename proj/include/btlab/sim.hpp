#pragma once

#include "btlab/ep_async.hpp"
#include "btlab/history.hpp"
#include "btlab/oracle.hpp"
#include "btlab/rng.hpp"
#include "btlab/streamlet.hpp"

#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

namespace btlab
{
    enum class Adversary
    {
        Fifo,
        RandomDelay,
        TargetedRace,
    };

    const char *to_string(Adversary a);
    std::optional<Adversary> adversary_from_string(const std::string &s);

    struct NetConfig
    {
        std::size_t n = 4;
        // Behavior tags; the vocabulary depends on the protocol.
        std::map<ProcessId, std::string> byzantine;
        // Permanent silence from the given tick on.
        std::map<ProcessId, Tick> crash_at;
        Tick gst = 0;
        Tick delta = 5;
        Tick horizon = 5000;
        std::uint64_t seed = 1;
        Adversary adversary = Adversary::RandomDelay;

        bool is_byzantine(ProcessId p) const { return byzantine.count(p) > 0; }
        std::vector<ProcessId> correct_processes() const;
        /// Throws ConfigError.
        void validate() const;
    };

    struct LinkInfo
    {
        bool sender_correct = true;
        bool recipient_correct = true;
        // Sender and recipient are correct and sit in different halves of the
        // pre-GST partition.
        bool cross_group = false;
    };

    /// Delivery tick for a message sent at `sent`. Correct senders always meet
    /// deliver_at <= max(gst, sent + delta); after GST every message arrives
    /// within [sent + 1, sent + delta].
    Tick schedule_delivery(const NetConfig &cfg, Tick sent, const LinkInfo &link, Rng &rng);

    // ---- ep-async over the oracle ----

    struct EpWorkload
    {
        Tick append_every = 20;
        Tick read_every = 25;
        double attack_probability = 0.3;
        EpAttack attack;
        // Unset: Theta_P.
        std::optional<std::size_t> fork_bound;
    };

    struct EpRun
    {
        History history;
        Blocktree tree;
        std::vector<AuditEntry> audit;
        std::vector<ProcessId> correct;
        std::size_t max_fork_width = 0;
        std::size_t correct_successful_appends = 0;
    };

    EpRun run_ep(const NetConfig &cfg, const EpWorkload &wl);

    // ---- modified Streamlet over a message network ----

    struct StreamletWorkload
    {
        Tick read_every = 10;
        bool two_thirds = false;
    };

    struct Delivery
    {
        ProcessId from, to;
        Tick sent = 0;
        Tick deliver_at = 0;
        bool correct_sender = true;
        bool vote = false;
    };

    struct StreamletRun
    {
        History history;
        std::vector<Delivery> deliveries;
        std::set<ProcessId> byzantine;
        std::map<ProcessId, Chain> finalized;
        // Per correct node.
        std::map<ProcessId, std::size_t> conflict_events;
        std::map<ProcessId, std::vector<DetectionEvent>> detections;
        std::size_t undelivered_correct = 0; // correct-sender messages due after the horizon
        std::size_t delta_violations = 0;
    };

    class StreamletSystem
    {
    public:
        StreamletSystem(NetConfig cfg, StreamletWorkload wl);

        Tick now() const noexcept { return now_; }
        bool done() const noexcept { return now_ >= cfg_.horizon; }
        /// Runs tick now(), then advances the clock.
        void step();
        void run_to_end();

        StreamletNode &node(ProcessId p) { return nodes_.at(p.value); }
        const StreamletNode &node(ProcessId p) const { return nodes_.at(p.value); }
        const NetConfig &config() const noexcept { return cfg_; }
        const History &history() const noexcept { return history_; }

        StreamletRun finish() &&;

    private:
        struct Pending
        {
            Tick deliver_at;
            std::uint64_t seq;
            ProcessId to;
            StreamletMessage msg;
            bool operator>(const Pending &o) const
            {
                return deliver_at != o.deliver_at ? deliver_at > o.deliver_at : seq > o.seq;
            }
        };

        bool crashed(ProcessId p) const;
        void send(ProcessId from, const Outgoing &o);

        NetConfig cfg_;
        StreamletWorkload wl_;
        Rng rng_;
        std::vector<StreamletNode> nodes_;
        std::set<ProcessId> group_a_;
        std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
        std::uint64_t seq_ = 0;
        std::map<ProcessId, Tick> read_offset_;
        History history_;
        std::vector<Delivery> deliveries_;
        Tick now_ = 0;
    };

    StreamletRun run_streamlet(const NetConfig &cfg, const StreamletWorkload &wl);
}
