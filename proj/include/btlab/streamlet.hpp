#pragma once

#include "btlab/blocktree.hpp"

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace btlab
{
    /// Public leader election: a seeded PRF of the epoch.
    ProcessId leader_of(std::uint64_t seed, std::uint64_t epoch, std::size_t n);

    /// Cond. 1: same epoch, distinct blocks. Cond. 2: the block with the larger
    /// epoch has a strictly smaller height (either orientation).
    bool inconsistent(const Block &b, const Block &b2);

    /// Votes per block with retroactive exclusion of detected processes. A block
    /// is notarized when more than n/2 (or at least 2n/3 in two-thirds mode)
    /// non-excluded processes voted for it; genesis is always notarized.
    class NotarizationState
    {
    public:
        explicit NotarizationState(std::size_t n, bool two_thirds = false);

        std::size_t n() const noexcept { return n_; }
        bool two_thirds() const noexcept { return two_thirds_; }

        /// Returns false when the block was already known.
        bool add_block(const BlockPtr &b);
        /// Returns false for a repeated vote.
        bool add_vote(ProcessId voter, const BlockPtr &b);
        void exclude(const std::set<ProcessId> &ps);

        bool knows(const BlockId &id) const { return blocks_.count(id) > 0; }
        BlockPtr block(const BlockId &id) const;
        const std::set<ProcessId> &voters(const BlockId &id) const;
        const std::set<ProcessId> &excluded() const noexcept { return excluded_; }
        std::size_t counted_votes(const BlockId &id) const;

        bool notarized(const BlockId &id) const;
        /// Notarized with every ancestor known and notarized.
        bool on_notarized_chain(const BlockId &id) const;
        /// Blocks on notarized chains, by increasing height.
        std::vector<BlockPtr> notarized_chain_blocks() const;
        /// A longest notarized chain; ties go to the smaller tip id.
        Chain longest_notarized_chain() const;
        /// The chain from genesis to a known block; nullopt when an ancestor is unknown.
        std::optional<Chain> chain_to(const BlockId &id) const;

        std::size_t block_count() const noexcept { return blocks_.size(); }

    private:
        void refresh() const;

        std::size_t n_;
        bool two_thirds_;
        std::unordered_map<BlockId, BlockPtr, BlockIdHash> blocks_;
        std::map<std::pair<std::uint64_t, BlockId>, BlockPtr> by_height_;
        std::unordered_map<BlockId, std::set<ProcessId>, BlockIdHash> votes_;
        std::set<ProcessId> excluded_;

        mutable bool dirty_ = true;
        mutable std::unordered_map<BlockId, bool, BlockIdHash> on_chain_;
        mutable std::vector<BlockPtr> chain_blocks_;
    };

    struct FinalityResult
    {
        Chain finalized;
        bool conflict = false;
        // Middle blocks of every notarized consecutive-epoch triple.
        std::vector<BlockPtr> final_tips;
    };

    /// Finalizes through the middle block of every three adjacent notarized-chain
    /// blocks with consecutive epochs. The finalized chain ends at the deepest
    /// final block (ties to the smaller id); conflict is set when final blocks are
    /// not totally ordered by the prefix relation.
    FinalityResult compute_finality(const NotarizationState &state);
    Chain try_finalize(const NotarizationState &state);

    /// Non-excluded processes that voted for both blocks of some inconsistent
    /// pair among the blocks on notarized chains.
    std::set<ProcessId> detect_byzantine(const NotarizationState &state);

    enum class StreamletBehavior
    {
        Correct,
        Silent,
        DoubleVoter, // votes for every proposal; proposes correctly
        VoteLow,     // votes once per epoch without the extension check; proposes below its tip
        Equivocator, // proposes two blocks per epoch, one per audience; votes like DoubleVoter
    };

    const char *to_string(StreamletBehavior b);
    std::optional<StreamletBehavior> streamlet_behavior_from_string(const std::string &s);

    struct StreamletMessage
    {
        enum class Kind
        {
            Propose,
            Vote,
        };
        Kind kind = Kind::Propose;
        ProcessId sender;
        std::uint64_t epoch = 0;
        BlockPtr block;
    };

    struct Outgoing
    {
        StreamletMessage msg;
        // Empty means every other process.
        std::vector<ProcessId> to;
    };

    struct StreamletParams
    {
        std::size_t n = 4;
        Tick delta = 5;
        std::uint64_t seed = 0;
        bool two_thirds = false;
        ValidityPredicate validity;
    };

    inline std::uint64_t epoch_of(Tick now, Tick delta) { return now / (2 * delta); }

    struct DetectionEvent
    {
        Tick tick = 0;
        std::set<ProcessId> flagged;
    };

    /// One process of the modified Streamlet protocol, driven by
    /// (tick, inbox) -> outbox. Epoch 0 belongs to genesis; proposals start at
    /// epoch 1.
    class StreamletNode
    {
    public:
        StreamletNode(ProcessId id, StreamletParams params, StreamletBehavior behavior = StreamletBehavior::Correct);

        ProcessId id() const noexcept { return id_; }
        StreamletBehavior behavior() const noexcept { return behavior_; }
        bool correct() const noexcept { return behavior_ == StreamletBehavior::Correct; }

        /// Equivocators split their two proposals between these audiences.
        void set_audiences(std::vector<ProcessId> first, std::vector<ProcessId> second);
        /// Payloads for future proposals, used in order.
        void enqueue_payload(Bytes payload) { payloads_.push_back(std::move(payload)); }
        std::size_t queued_payloads() const noexcept { return payloads_.size(); }

        std::vector<Outgoing> tick(Tick now, const std::vector<StreamletMessage> &inbox);

        /// Blocks this node proposed during the last tick() call.
        const std::vector<BlockPtr> &last_proposals() const noexcept { return proposals_; }

        const Chain &finalized() const noexcept { return finalized_; }
        const NotarizationState &state() const noexcept { return state_; }
        bool in_conflict() const noexcept { return in_conflict_; }
        std::size_t conflict_events() const noexcept { return conflict_events_; }
        const std::vector<DetectionEvent> &detections() const noexcept { return detections_; }
        std::size_t votes_cast() const noexcept { return votes_cast_; }
        /// Epochs in which this node voted, with the voted block ids.
        const std::map<std::uint64_t, std::vector<BlockId>> &vote_log() const noexcept { return vote_log_; }

    private:
        void on_proposal(const StreamletMessage &m, Tick now, std::vector<Outgoing> &out);
        void on_vote(const StreamletMessage &m);
        void vote(const BlockPtr &b, std::uint64_t epoch, std::vector<Outgoing> &out);
        void propose(Tick now, std::uint64_t epoch, std::vector<Outgoing> &out);
        BlockPtr mint(const Block &parent, std::uint64_t epoch, std::uint8_t variant);
        bool extends_longest(const Block &b) const;
        void recompute(Tick now);

        ProcessId id_;
        StreamletParams params_;
        StreamletBehavior behavior_;
        NotarizationState state_;
        std::vector<ProcessId> audience_a_, audience_b_;
        std::deque<Bytes> payloads_;

        std::optional<std::uint64_t> voted_epoch_;
        std::optional<std::uint64_t> seen_proposal_epoch_;
        std::optional<std::uint64_t> proposed_epoch_;
        std::set<BlockId> voted_blocks_;
        std::map<std::uint64_t, std::vector<BlockId>> vote_log_;
        std::size_t votes_cast_ = 0;

        std::vector<BlockPtr> proposals_;
        Chain finalized_;
        bool dirty_ = false;
        bool in_conflict_ = false;
        std::size_t conflict_events_ = 0;
        std::vector<DetectionEvent> detections_;
    };
}
