#include "btlab/chain.hpp"

#include <algorithm>
#include <stdexcept>

namespace btlab
{
    namespace
    {
        bool compute_linked(const std::vector<BlockPtr> &blocks)
        {
            if (blocks.empty() || !blocks.front()->is_genesis())
                return false;
            for (std::size_t i = 1; i < blocks.size(); ++i)
            {
                if (blocks[i]->parent != blocks[i - 1]->id || blocks[i]->height != blocks[i - 1]->height + 1)
                    return false;
            }
            return true;
        }
    }

    Chain::Chain() : blocks_{genesis_block()}, linked_(true) {}

    Chain::Chain(std::vector<BlockPtr> blocks) : blocks_(std::move(blocks)), linked_(compute_linked(blocks_)) {}

    Chain Chain::extended(BlockPtr b) const
    {
        std::vector<BlockPtr> next;
        next.reserve(blocks_.size() + 1);
        next = blocks_;
        next.push_back(std::move(b));
        return Chain(std::move(next));
    }

    Chain Chain::prefix(std::size_t n) const
    {
        n = std::min(n, blocks_.size());
        Chain out(std::vector<BlockPtr>(blocks_.begin(), blocks_.begin() + static_cast<std::ptrdiff_t>(n)));
        return out;
    }

    std::vector<BlockId> Chain::ids() const
    {
        std::vector<BlockId> out;
        out.reserve(blocks_.size());
        for (const auto &b : blocks_)
            out.push_back(b->id);
        return out;
    }

    bool operator==(const Chain &a, const Chain &b)
    {
        if (a.size() != b.size())
            return false;
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            if (a[i].id != b[i].id)
                return false;
        }
        return true;
    }

    std::size_t length(const Chain &bc) { return bc.size(); }

    std::size_t common_prefix_length(const Chain &a, const Chain &b)
    {
        const std::size_t limit = std::min(a.size(), b.size());
        if (a.linked() && b.linked())
        {
            // Ids digest their parent id, so agreement at position k implies
            // agreement on the whole prefix: binary search for the last match.
            std::size_t lo = 0, hi = limit;
            while (lo < hi)
            {
                std::size_t mid = lo + (hi - lo) / 2;
                if (a[mid].id == b[mid].id)
                    lo = mid + 1;
                else
                    hi = mid;
            }
            return lo;
        }
        std::size_t i = 0;
        while (i < limit && a[i].id == b[i].id)
            ++i;
        return i;
    }

    bool is_prefix(const Chain &bc, const Chain &other)
    {
        if (bc.size() > other.size())
            return false;
        if (bc.empty())
            return true;
        if (bc.linked() && other.linked())
            return bc.tip().id == other[bc.size() - 1].id;
        return common_prefix_length(bc, other) == bc.size();
    }

    bool comparable(const Chain &a, const Chain &b)
    {
        return a.size() <= b.size() ? is_prefix(a, b) : is_prefix(b, a);
    }

    Chain prune_last(const Chain &bc, std::size_t d)
    {
        if (bc.empty())
            return bc;
        const std::size_t keep = bc.size() - std::min(d, bc.size() - 1);
        return bc.prefix(keep);
    }

    Chain prune_half(const Chain &bc)
    {
        if (bc.empty())
            return bc;
        return bc.prefix((bc.size() + 1) / 2);
    }

    std::size_t displacement(const Chain &from, const Chain &to)
    {
        const std::size_t shared = common_prefix_length(from, to);
        if (shared == 0)
            throw std::invalid_argument("displacement: chains do not share genesis");
        return from.size() - shared;
    }
}
