#include "btlab/blocktree.hpp"

#include "btlab/errors.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace btlab
{
    Blocktree::Blocktree() : arena_(std::make_shared<Arena>()), count_(1)
    {
        Node root;
        root.block = genesis_block();
        root.parent = 0;
        arena_->nodes.push_back(root);
        arena_->index.emplace(root.block->id, 0);
    }

    Blocktree new_tree() { return Blocktree(); }

    std::optional<std::size_t> Blocktree::index_of(const BlockId &id) const
    {
        auto it = arena_->index.find(id);
        if (it == arena_->index.end() || it->second >= count_)
            return std::nullopt;
        return it->second;
    }

    const Blocktree::Node &Blocktree::node(std::size_t index) const { return arena_->nodes.at(index); }

    std::span<const std::size_t> Blocktree::child_indices(std::size_t index) const
    {
        const auto &kids = arena_->nodes[index].children;
        // Children are appended in increasing index order, so the visible ones
        // form a prefix.
        auto end = std::lower_bound(kids.begin(), kids.end(), count_);
        return {kids.data(), static_cast<std::size_t>(end - kids.begin())};
    }

    bool Blocktree::contains(const BlockId &id) const { return index_of(id).has_value(); }

    BlockPtr Blocktree::find(const BlockId &id) const
    {
        auto idx = index_of(id);
        return idx ? arena_->nodes[*idx].block : nullptr;
    }

    std::optional<Tick> Blocktree::created_at(const BlockId &id) const
    {
        auto idx = index_of(id);
        if (!idx)
            return std::nullopt;
        return arena_->nodes[*idx].created;
    }

    std::vector<BlockPtr> Blocktree::children(const BlockId &id) const
    {
        std::vector<BlockPtr> out;
        auto idx = index_of(id);
        if (!idx)
            return out;
        for (auto c : child_indices(*idx))
            out.push_back(arena_->nodes[c].block);
        return out;
    }

    std::size_t Blocktree::child_count(const BlockId &id) const
    {
        auto idx = index_of(id);
        return idx ? child_indices(*idx).size() : 0;
    }

    std::vector<BlockPtr> Blocktree::blocks() const
    {
        std::vector<BlockPtr> out;
        out.reserve(count_);
        for (std::size_t i = 0; i < count_; ++i)
            out.push_back(arena_->nodes[i].block);
        return out;
    }

    std::vector<BlockPtr> Blocktree::leaves() const
    {
        std::vector<BlockPtr> out;
        for (std::size_t i = 0; i < count_; ++i)
        {
            if (child_indices(i).empty())
                out.push_back(arena_->nodes[i].block);
        }
        return out;
    }

    Chain Blocktree::chain_to(const BlockId &id) const
    {
        auto idx = index_of(id);
        if (!idx)
            throw UnknownParent(id.hex());
        std::vector<BlockPtr> rev;
        std::size_t cur = *idx;
        while (true)
        {
            rev.push_back(arena_->nodes[cur].block);
            if (cur == 0)
                break;
            cur = arena_->nodes[cur].parent;
        }
        std::reverse(rev.begin(), rev.end());
        return Chain(std::move(rev));
    }

    std::shared_ptr<Blocktree::Arena> Blocktree::copy_visible() const
    {
        auto fresh = std::make_shared<Arena>();
        fresh->nodes.reserve(count_ + 1);
        for (std::size_t i = 0; i < count_; ++i)
        {
            Node n = arena_->nodes[i];
            auto visible = child_indices(i);
            n.children.assign(visible.begin(), visible.end());
            fresh->nodes.push_back(std::move(n));
            fresh->index.emplace(fresh->nodes.back().block->id, i);
        }
        return fresh;
    }

    Blocktree Blocktree::detach() const { return Blocktree(copy_visible(), count_); }

    Blocktree Blocktree::attach(BlockPtr b, Tick created) const
    {
        if (!b)
            throw std::invalid_argument("attach: null block");
        if (contains(b->id))
            throw DuplicateBlock(b->id.hex());
        auto parent_idx = index_of(b->parent);
        if (!parent_idx)
            throw UnknownParent(b->parent.hex());
        if (b->height != arena_->nodes[*parent_idx].block->height + 1)
            throw std::invalid_argument("attach: height does not follow parent");

        std::shared_ptr<Arena> arena = arena_;
        if (arena->nodes.size() != count_)
        {
            // Someone already extended this arena past our version.
            arena = copy_visible();
        }
        const std::size_t idx = arena->nodes.size();
        Node n;
        n.block = std::move(b);
        n.created = created;
        n.parent = *parent_idx;
        arena->nodes.push_back(std::move(n));
        arena->nodes[*parent_idx].children.push_back(idx);
        arena->index.emplace(arena->nodes[idx].block->id, idx);
        return Blocktree(std::move(arena), count_ + 1);
    }

    bool operator==(const Blocktree &a, const Blocktree &b)
    {
        if (a.size() != b.size())
            return false;
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            const auto &blk = a.node(i).block;
            auto other = b.find(blk->id);
            if (!other || other->parent != blk->parent)
                return false;
        }
        return true;
    }

    Chain f_lowest_id(const Blocktree &bt)
    {
        std::vector<BlockPtr> path;
        std::size_t cur = 0;
        path.push_back(bt.node(0).block);
        while (true)
        {
            auto kids = bt.child_indices(cur);
            if (kids.empty())
                break;
            // Earliest child per creator; attach order breaks equal ticks.
            std::map<ProcessId, std::size_t> earliest;
            for (auto k : kids)
            {
                const auto &node = bt.node(k);
                auto [it, inserted] = earliest.emplace(node.block->creator, k);
                if (!inserted)
                {
                    const auto &held = bt.node(it->second);
                    if (node.created < held.created)
                        it->second = k;
                }
            }
            std::size_t best = earliest.begin()->second;
            for (const auto &[creator, k] : earliest)
            {
                if (bt.node(k).block->id < bt.node(best).block->id)
                    best = k;
            }
            path.push_back(bt.node(best).block);
            cur = best;
        }
        return Chain(std::move(path));
    }

    std::uint64_t unit_weight(const Block &) { return 1; }

    std::uint64_t weighted_length(const Chain &bc, const BlockWeight &weight)
    {
        std::uint64_t total = 0;
        for (const auto &b : bc.blocks())
            total += weight(*b);
        return total;
    }

    Chain f_longest(const Blocktree &bt) { return f_longest(bt, unit_weight); }

    Chain f_longest(const Blocktree &bt, const BlockWeight &weight)
    {
        // Attach order is topological, so one forward pass accumulates lengths.
        std::vector<std::uint64_t> len(bt.size());
        len[0] = weight(*bt.node(0).block);
        for (std::size_t i = 1; i < bt.size(); ++i)
        {
            const auto &n = bt.node(i);
            len[i] = len[n.parent] + weight(*n.block);
        }
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < bt.size(); ++i)
        {
            if (!bt.child_indices(i).empty())
                continue;
            if (!best || len[i] > len[*best] ||
                (len[i] == len[*best] && bt.node(i).block->id < bt.node(*best).block->id))
            {
                best = i;
            }
        }
        return bt.chain_to(bt.node(*best).block->id);
    }

    const Bytes &invalid_payload_tag()
    {
        static const Bytes tag = {0xff, 'I', 'N', 'V', 'A', 'L', 'I', 'D'};
        return tag;
    }

    Bytes invalid_payload() { return invalid_payload_tag(); }

    bool standard_payload_ok(std::span<const std::uint8_t> payload)
    {
        const auto &tag = invalid_payload_tag();
        if (payload.size() < tag.size())
            return true;
        return !std::equal(tag.begin(), tag.end(), payload.begin());
    }

    ValidityPredicate structural_validity(PayloadCheck payload_ok)
    {
        return [payload_ok = std::move(payload_ok)](const Chain &bc) {
            if (!bc.linked())
                return false;
            if (bc[0].id != genesis_block()->id)
                return false;
            for (std::size_t i = 1; i < bc.size(); ++i)
            {
                if (payload_ok && !payload_ok(bc[i].payload))
                    return false;
            }
            return true;
        };
    }

    ValidityPredicate standard_validity() { return structural_validity(standard_payload_ok); }

    AppendOutcome apply_append(const Blocktree &bt, const BlockContent &content, const SelectionFn &f_a,
                               const ValidityPredicate &valid, Tick created)
    {
        Chain selected = f_a(bt);
        BlockPtr b = make_block(selected.tip(), content.creator, content.epoch, content.payload);
        if (bt.contains(b->id))
            throw DuplicateBlock(b->id.hex());
        if (!valid(selected.extended(b)))
            return {bt, false, b};
        return {bt.attach(b, created), true, b};
    }

    Chain read_tree(const Blocktree &bt, const SelectionFn &f_r) { return f_r(bt); }
}
