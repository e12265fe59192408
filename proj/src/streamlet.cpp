#include "btlab/streamlet.hpp"

#include "btlab/rng.hpp"

#include <algorithm>
#include <unordered_set>

namespace btlab
{
    ProcessId leader_of(std::uint64_t seed, std::uint64_t epoch, std::size_t n)
    {
        return ProcessId{static_cast<std::uint32_t>(prf(seed, epoch) % n)};
    }

    bool inconsistent(const Block &b, const Block &b2)
    {
        if (b.id == b2.id)
            return false;
        if (b.epoch == b2.epoch)
            return true;
        const Block &later = b.epoch > b2.epoch ? b : b2;
        const Block &earlier = b.epoch > b2.epoch ? b2 : b;
        return later.height < earlier.height;
    }

    NotarizationState::NotarizationState(std::size_t n, bool two_thirds) : n_(n), two_thirds_(two_thirds)
    {
        add_block(genesis_block());
    }

    bool NotarizationState::add_block(const BlockPtr &b)
    {
        if (!blocks_.emplace(b->id, b).second)
            return false;
        by_height_.emplace(std::make_pair(b->height, b->id), b);
        dirty_ = true;
        return true;
    }

    bool NotarizationState::add_vote(ProcessId voter, const BlockPtr &b)
    {
        add_block(b);
        if (!votes_[b->id].insert(voter).second)
            return false;
        dirty_ = true;
        return true;
    }

    void NotarizationState::exclude(const std::set<ProcessId> &ps)
    {
        for (auto p : ps)
            dirty_ = excluded_.insert(p).second || dirty_;
    }

    BlockPtr NotarizationState::block(const BlockId &id) const
    {
        auto it = blocks_.find(id);
        return it == blocks_.end() ? nullptr : it->second;
    }

    const std::set<ProcessId> &NotarizationState::voters(const BlockId &id) const
    {
        static const std::set<ProcessId> kNone;
        auto it = votes_.find(id);
        return it == votes_.end() ? kNone : it->second;
    }

    std::size_t NotarizationState::counted_votes(const BlockId &id) const
    {
        std::size_t c = 0;
        for (auto p : voters(id))
            c += excluded_.count(p) ? 0 : 1;
        return c;
    }

    bool NotarizationState::notarized(const BlockId &id) const
    {
        if (id == genesis_block()->id)
            return true;
        const std::size_t c = counted_votes(id);
        return two_thirds_ ? 3 * c >= 2 * n_ : 2 * c > n_;
    }

    void NotarizationState::refresh() const
    {
        if (!dirty_)
            return;
        on_chain_.clear();
        chain_blocks_.clear();
        // Parents have smaller heights, so one pass in height order suffices.
        for (const auto &[key, b] : by_height_)
        {
            bool ok;
            if (b->is_genesis())
                ok = true;
            else
            {
                auto parent = on_chain_.find(b->parent);
                ok = parent != on_chain_.end() && parent->second && notarized(b->id);
            }
            on_chain_[b->id] = ok;
            if (ok)
                chain_blocks_.push_back(b);
        }
        dirty_ = false;
    }

    bool NotarizationState::on_notarized_chain(const BlockId &id) const
    {
        refresh();
        auto it = on_chain_.find(id);
        return it != on_chain_.end() && it->second;
    }

    std::vector<BlockPtr> NotarizationState::notarized_chain_blocks() const
    {
        refresh();
        return chain_blocks_;
    }

    std::optional<Chain> NotarizationState::chain_to(const BlockId &id) const
    {
        std::vector<BlockPtr> rev;
        BlockPtr cur = block(id);
        while (cur)
        {
            rev.push_back(cur);
            if (cur->is_genesis())
            {
                std::reverse(rev.begin(), rev.end());
                return Chain(std::move(rev));
            }
            cur = block(cur->parent);
        }
        return std::nullopt;
    }

    Chain NotarizationState::longest_notarized_chain() const
    {
        refresh();
        BlockPtr best = chain_blocks_.front();
        for (const auto &b : chain_blocks_)
        {
            if (b->height > best->height || (b->height == best->height && b->id < best->id))
                best = b;
        }
        return *chain_to(best->id);
    }

    FinalityResult compute_finality(const NotarizationState &state)
    {
        FinalityResult out;
        const auto blocks = state.notarized_chain_blocks();
        std::unordered_set<BlockId, BlockIdHash> tips;
        for (const auto &b3 : blocks)
        {
            if (b3->height < 2)
                continue;
            auto b2 = state.block(b3->parent);
            auto b1 = state.block(b2->parent);
            if (b2->epoch == b1->epoch + 1 && b3->epoch == b2->epoch + 1 && tips.insert(b2->id).second)
                out.final_tips.push_back(b2);
        }
        if (out.final_tips.empty())
            return out;

        BlockPtr deepest = out.final_tips.front();
        for (const auto &t : out.final_tips)
        {
            if (t->height > deepest->height || (t->height == deepest->height && t->id < deepest->id))
                deepest = t;
        }
        out.finalized = *state.chain_to(deepest->id);
        std::unordered_set<BlockId, BlockIdHash> on_final;
        for (const auto &b : out.finalized.blocks())
            on_final.insert(b->id);
        for (const auto &t : out.final_tips)
            out.conflict = out.conflict || !on_final.count(t->id);
        return out;
    }

    Chain try_finalize(const NotarizationState &state) { return compute_finality(state).finalized; }

    std::set<ProcessId> detect_byzantine(const NotarizationState &state)
    {
        std::set<ProcessId> flagged;
        const auto blocks = state.notarized_chain_blocks();
        auto flag_common = [&](const Block &a, const Block &b) {
            const auto &va = state.voters(a.id);
            const auto &vb = state.voters(b.id);
            for (auto p : va)
            {
                if (vb.count(p) && !state.excluded().count(p))
                    flagged.insert(p);
            }
        };
        for (std::size_t i = 0; i < blocks.size(); ++i)
        {
            if (blocks[i]->is_genesis())
                continue;
            for (std::size_t j = i + 1; j < blocks.size(); ++j)
            {
                if (inconsistent(*blocks[i], *blocks[j]))
                    flag_common(*blocks[i], *blocks[j]);
            }
        }
        return flagged;
    }

    const char *to_string(StreamletBehavior b)
    {
        switch (b)
        {
        case StreamletBehavior::Correct:
            return "correct";
        case StreamletBehavior::Silent:
            return "silent";
        case StreamletBehavior::DoubleVoter:
            return "double-voter";
        case StreamletBehavior::VoteLow:
            return "vote-low";
        case StreamletBehavior::Equivocator:
            return "equivocator";
        }
        return "?";
    }

    std::optional<StreamletBehavior> streamlet_behavior_from_string(const std::string &s)
    {
        for (auto b : {StreamletBehavior::Correct, StreamletBehavior::Silent, StreamletBehavior::DoubleVoter,
                       StreamletBehavior::VoteLow, StreamletBehavior::Equivocator})
        {
            if (s == to_string(b))
                return b;
        }
        return std::nullopt;
    }

    StreamletNode::StreamletNode(ProcessId id, StreamletParams params, StreamletBehavior behavior)
        : id_(id), params_(std::move(params)), behavior_(behavior), state_(params_.n, params_.two_thirds)
    {
        if (!params_.validity)
            params_.validity = standard_validity();
    }

    void StreamletNode::set_audiences(std::vector<ProcessId> first, std::vector<ProcessId> second)
    {
        audience_a_ = std::move(first);
        audience_b_ = std::move(second);
    }

    std::vector<Outgoing> StreamletNode::tick(Tick now, const std::vector<StreamletMessage> &inbox)
    {
        std::vector<Outgoing> out;
        proposals_.clear();
        if (behavior_ == StreamletBehavior::Silent)
            return out;

        for (const auto &m : inbox)
        {
            if (m.kind == StreamletMessage::Kind::Propose)
                on_proposal(m, now, out);
            else
                on_vote(m);
        }
        const std::uint64_t epoch = epoch_of(now, params_.delta);
        if (epoch > 0 && proposed_epoch_ != epoch && leader_of(params_.seed, epoch, params_.n) == id_)
        {
            if (dirty_)
                recompute(now);
            propose(now, epoch, out);
        }
        if (dirty_)
            recompute(now);
        return out;
    }

    bool StreamletNode::extends_longest(const Block &b) const
    {
        if (!state_.on_notarized_chain(b.parent))
            return false;
        const Chain longest = state_.longest_notarized_chain();
        return state_.block(b.parent)->height == longest.tip().height;
    }

    void StreamletNode::on_proposal(const StreamletMessage &m, Tick now, std::vector<Outgoing> &out)
    {
        const BlockPtr &b = m.block;
        dirty_ = state_.add_block(b) || dirty_;
        const std::uint64_t epoch = epoch_of(now, params_.delta);
        const bool from_leader = m.sender == leader_of(params_.seed, m.epoch, params_.n) && b->creator == m.sender &&
                                 b->epoch == m.epoch;
        if (!from_leader)
            return;

        switch (behavior_)
        {
        case StreamletBehavior::Correct:
        {
            if (state_.excluded().count(m.sender) || m.epoch != epoch)
                return;
            if (seen_proposal_epoch_ == epoch)
                return;
            seen_proposal_epoch_ = epoch;
            if (voted_epoch_ == epoch)
                return;
            if (dirty_)
                recompute(now);
            if (!extends_longest(*b))
                return;
            auto chain = state_.chain_to(b->id);
            if (!chain || !params_.validity(*chain))
                return;
            voted_epoch_ = epoch;
            vote(b, epoch, out);
            break;
        }
        case StreamletBehavior::DoubleVoter:
        case StreamletBehavior::Equivocator:
            vote(b, m.epoch, out);
            break;
        case StreamletBehavior::VoteLow:
            if (m.epoch != epoch || seen_proposal_epoch_ == epoch)
                return;
            seen_proposal_epoch_ = epoch;
            vote(b, epoch, out);
            break;
        case StreamletBehavior::Silent:
            break;
        }
    }

    void StreamletNode::on_vote(const StreamletMessage &m)
    {
        if (m.block->is_genesis())
            return;
        dirty_ = state_.add_vote(m.sender, m.block) || dirty_;
    }

    void StreamletNode::vote(const BlockPtr &b, std::uint64_t epoch, std::vector<Outgoing> &out)
    {
        if (!voted_blocks_.insert(b->id).second)
            return;
        ++votes_cast_;
        vote_log_[epoch].push_back(b->id);
        dirty_ = state_.add_vote(id_, b) || dirty_;
        out.push_back({StreamletMessage{StreamletMessage::Kind::Vote, id_, epoch, b}, {}});
    }

    BlockPtr StreamletNode::mint(const Block &parent, std::uint64_t epoch, std::uint8_t variant)
    {
        Bytes payload;
        if (variant == 0 && !payloads_.empty())
        {
            payload = std::move(payloads_.front());
            payloads_.pop_front();
        }
        else
        {
            payload = u64_payload(epoch);
            auto tag = u64_payload(id_.value);
            payload.insert(payload.end(), tag.begin(), tag.begin() + 4);
            payload.push_back(variant);
        }
        return make_block(parent, id_, epoch, std::move(payload));
    }

    void StreamletNode::propose(Tick now, std::uint64_t epoch, std::vector<Outgoing> &out)
    {
        proposed_epoch_ = epoch;
        const Chain longest = state_.longest_notarized_chain();
        const Block *parent = &longest.tip();
        if (behavior_ == StreamletBehavior::VoteLow && longest.size() > 1)
            parent = &longest[longest.size() - 2];

        auto send = [&](const BlockPtr &b, std::vector<ProcessId> to) {
            proposals_.push_back(b);
            StreamletMessage m{StreamletMessage::Kind::Propose, id_, epoch, b};
            out.push_back({m, std::move(to)});
            on_proposal(m, now, out);
        };

        if (behavior_ == StreamletBehavior::Equivocator && !audience_a_.empty() && !audience_b_.empty())
        {
            send(mint(*parent, epoch, 1), audience_a_);
            send(mint(*parent, epoch, 2), audience_b_);
            return;
        }
        send(mint(*parent, epoch, 0), {});
    }

    void StreamletNode::recompute(Tick now)
    {
        dirty_ = false;
        FinalityResult fin = compute_finality(state_);
        if (fin.conflict && !in_conflict_)
            ++conflict_events_;
        if (fin.conflict && correct())
        {
            for (;;)
            {
                auto flagged = detect_byzantine(state_);
                if (flagged.empty())
                    break;
                detections_.push_back({now, flagged});
                state_.exclude(flagged);
                fin = compute_finality(state_);
                if (!fin.conflict)
                    break;
            }
        }
        in_conflict_ = fin.conflict;
        finalized_ = std::move(fin.finalized);
    }
}
