#include "btlab/oracle.hpp"

#include "btlab/errors.hpp"

#include <algorithm>
#include <stdexcept>

namespace btlab
{
    Oracle::Oracle(ValidityPredicate valid, std::optional<std::size_t> fork_bound)
        : valid_(std::move(valid)), k_(fork_bound)
    {
        if (k_ && *k_ == 0)
            throw ConfigError("fork bound must be at least 1");
        versions_.push_back({0, new_tree()});
    }

    void Oracle::advance_to(Tick now)
    {
        if (now < now_)
            throw std::logic_error("oracle clock moved backwards");
        now_ = now;
    }

    ViewSnapshot Oracle::update_view(ProcessId p, Tick as_of)
    {
        as_of = std::min(as_of, now_);
        // Only commits from ticks before as_of are visible: operations sharing a
        // tick are concurrent. Commit ticks are non-decreasing.
        auto it = std::lower_bound(versions_.begin() + 1, versions_.end(), as_of,
                                   [](const Commit &c, Tick t) { return c.tick < t; });
        std::size_t idx = static_cast<std::size_t>(it - versions_.begin()) - 1;
        auto &last = last_view_[p];
        idx = std::max(idx, last);
        last = idx;
        Blocktree tree = versions_[idx].tree;
        // A writer always observes its own commits, but not the commits of
        // others that landed in the same tick before its own.
        const auto &own = own_[p];
        auto unseen = std::upper_bound(own.begin(), own.end(), idx,
                                       [](std::size_t i, const OwnCommit &c) { return i < c.version; });
        for (; unseen != own.end(); ++unseen)
            tree = tree.attach(unseen->block, unseen->tick);
        if (audit_views_)
            audit_.push_back({"update_view", p, now_, std::nullopt, std::nullopt, tree.version(), "ok"});
        return {tree, tree.version()};
    }

    bool Oracle::get_valid_block(ProcessId p, const BlockId &parent, const BlockPtr &candidate)
    {
        const auto &tree = global();
        if (!tree.contains(parent))
            throw UnknownParent(parent.hex());
        if (!candidate || candidate->parent != parent)
            throw std::invalid_argument("candidate does not name the given parent");
        if (tree.contains(candidate->id))
            throw DuplicateBlock(candidate->id.hex());

        bool ok = true;
        std::string reason = "granted";
        auto pend = pending_.find(parent);
        const std::size_t outstanding = pend == pending_.end() ? 0 : pend->second.size();
        const bool already = grants_.count(candidate->id) > 0;
        if (!already && k_ && tree.child_count(parent) + outstanding >= *k_)
        {
            ok = false;
            reason = "fork-bound";
        }
        else if (!valid_(tree.chain_to(parent).extended(candidate)))
        {
            ok = false;
            reason = "invalid";
        }
        if (ok && !already)
        {
            grants_.emplace(candidate->id, parent);
            pending_[parent].insert(candidate->id);
        }
        audit_.push_back({"get_valid_block", p, now_, parent, candidate->id, version(), reason});
        return ok;
    }

    std::vector<BlockId> Oracle::set_valid_block(ProcessId p, const BlockId &parent, const BlockPtr &b)
    {
        auto g = grants_.find(b->id);
        if (g == grants_.end() || g->second != parent || b->parent != parent)
            throw UngrantedBlock(b->id.hex());

        std::string result = "retry";
        if (!global().contains(b->id))
        {
            versions_.push_back({now_, global().attach(b, now_)});
            pending_[parent].erase(b->id);
            own_[p].push_back({b, now_, versions_.size() - 1});
            result = "attached";
        }
        std::vector<BlockId> kids;
        for (const auto &c : global().children(parent))
            kids.push_back(c->id);
        audit_.push_back({"set_valid_block", p, now_, parent, b->id, version(), result});
        return kids;
    }

    std::size_t Oracle::max_fork_width() const
    {
        std::size_t widest = 0;
        const auto &tree = global();
        for (std::size_t i = 0; i < tree.size(); ++i)
            widest = std::max(widest, tree.child_indices(i).size());
        return widest;
    }
}
