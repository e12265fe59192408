#pragma once

#include "btlab/block.hpp"

#include <cstddef>
#include <vector>

namespace btlab
{
    /// A path from genesis towards a leaf, indexable as bc[i]. Positions past the
    /// end are "undefined" (the bottom value); use at() to probe them.
    class Chain
    {
    public:
        /// The genesis-only chain.
        Chain();
        explicit Chain(std::vector<BlockPtr> blocks);

        std::size_t size() const noexcept { return blocks_.size(); }
        bool empty() const noexcept { return blocks_.empty(); }

        const Block &operator[](std::size_t i) const { return *blocks_[i]; }
        const BlockPtr &ptr(std::size_t i) const { return blocks_[i]; }
        // nullptr past the end.
        const Block *at(std::size_t i) const { return i < blocks_.size() ? blocks_[i].get() : nullptr; }
        const Block &tip() const { return *blocks_.back(); }
        const BlockPtr &tip_ptr() const { return blocks_.back(); }
        const std::vector<BlockPtr> &blocks() const noexcept { return blocks_; }

        /// True when every block links to its predecessor (parent ids and heights).
        /// Chains read from a tree are always linked; forged trace chains may not be.
        bool linked() const noexcept { return linked_; }

        Chain extended(BlockPtr b) const;
        Chain prefix(std::size_t n) const;

        std::vector<BlockId> ids() const;

        friend bool operator==(const Chain &a, const Chain &b);

    private:
        std::vector<BlockPtr> blocks_;
        bool linked_ = true;
    };

    /// Block count. Strictly increasing under extension.
    std::size_t length(const Chain &bc);

    /// Number of leading positions on which the chains agree.
    std::size_t common_prefix_length(const Chain &a, const Chain &b);

    /// bc is an initial segment of other.
    bool is_prefix(const Chain &bc, const Chain &other);

    /// Either chain prefixes the other.
    bool comparable(const Chain &a, const Chain &b);

    /// Removes min(d, length - 1) trailing blocks; genesis always survives.
    Chain prune_last(const Chain &bc, std::size_t d);

    /// Keeps the first ceil(length / 2) blocks.
    Chain prune_half(const Chain &bc);

    /// Minimal d with prune_last(from, d) a prefix of to.
    /// Throws std::invalid_argument when the chains do not share genesis.
    std::size_t displacement(const Chain &from, const Chain &to);
}
