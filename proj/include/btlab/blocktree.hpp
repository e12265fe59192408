#pragma once

#include "btlab/block.hpp"
#include "btlab/chain.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace btlab
{
    /// Immutable snapshot of a rooted block tree.
    ///
    /// Versions share an append-only arena: a snapshot is the arena plus the
    /// number of nodes it can see. attach() appends in place when the snapshot
    /// is the newest version of its arena and copies the visible prefix
    /// otherwise, so every Blocktree value behaves as an independent value.
    /// Snapshots that share an arena must not be read from another thread while
    /// the newest version is being extended; use detach() to obtain a private copy.
    class Blocktree
    {
    public:
        /// The tree containing only genesis.
        Blocktree();

        std::size_t size() const noexcept { return count_; }
        // The number of visible blocks doubles as a version number.
        std::uint64_t version() const noexcept { return count_; }

        bool contains(const BlockId &id) const;
        BlockPtr find(const BlockId &id) const;
        std::optional<Tick> created_at(const BlockId &id) const;

        /// Children of id in attach order.
        std::vector<BlockPtr> children(const BlockId &id) const;
        std::size_t child_count(const BlockId &id) const;

        /// Visible blocks in attach order; genesis first.
        std::vector<BlockPtr> blocks() const;
        std::vector<BlockPtr> leaves() const;

        /// The chain from genesis to id. Throws UnknownParent when id is absent.
        Chain chain_to(const BlockId &id) const;

        /// Returns a tree with b attached under b->parent. Throws DuplicateBlock or
        /// UnknownParent; std::invalid_argument for a height that does not follow
        /// the parent.
        Blocktree attach(BlockPtr b, Tick created = 0) const;

        Blocktree detach() const;

        /// Same visible blocks and edges.
        friend bool operator==(const Blocktree &a, const Blocktree &b);

        // Internal node access used by selection functions.
        struct Node
        {
            BlockPtr block;
            Tick created = 0;
            std::size_t parent = 0;
            std::vector<std::size_t> children;
        };
        const Node &node(std::size_t index) const;
        std::optional<std::size_t> index_of(const BlockId &id) const;
        /// Visible children indices (attach order).
        std::span<const std::size_t> child_indices(std::size_t index) const;

    private:
        struct Arena
        {
            std::vector<Node> nodes;
            std::unordered_map<BlockId, std::size_t, BlockIdHash> index;
        };

        Blocktree(std::shared_ptr<Arena> arena, std::size_t count) : arena_(std::move(arena)), count_(count) {}

        std::shared_ptr<Arena> copy_visible() const;

        std::shared_ptr<Arena> arena_;
        std::size_t count_ = 0;
    };

    Blocktree new_tree();

    using SelectionFn = std::function<Chain(const Blocktree &)>;
    using PayloadCheck = std::function<bool(std::span<const std::uint8_t>)>;
    using ValidityPredicate = std::function<bool(const Chain &)>;
    /// Per-block contribution to a chain's length; must be at least 1.
    using BlockWeight = std::function<std::uint64_t(const Block &)>;

    /// Walks from genesis, keeping only the earliest child of each creator at every
    /// fork and following the child with the smallest id.
    Chain f_lowest_id(const Blocktree &bt);

    /// A maximal-length chain; equal lengths are broken by the smaller leaf id.
    Chain f_longest(const Blocktree &bt);
    Chain f_longest(const Blocktree &bt, const BlockWeight &weight);

    std::uint64_t unit_weight(const Block &b);
    std::uint64_t weighted_length(const Chain &bc, const BlockWeight &weight);

    /// Payload prefix that the standard payload rule rejects.
    const Bytes &invalid_payload_tag();
    Bytes invalid_payload();
    bool standard_payload_ok(std::span<const std::uint8_t> payload);

    /// Structural linking from genesis plus a payload check on every non-genesis block.
    ValidityPredicate structural_validity(PayloadCheck payload_ok);
    /// structural_validity(standard_payload_ok).
    ValidityPredicate standard_validity();

    /// What the caller asks to append; the parent is chosen by f_a.
    struct BlockContent
    {
        ProcessId creator;
        std::uint64_t epoch = 0;
        Bytes payload;
    };

    struct AppendOutcome
    {
        Blocktree tree;
        bool ack = false;
        BlockPtr block; // the minted block, set even when rejected
    };

    /// Transition and output functions for append: mints the block under
    /// last_block(f_a(bt)) and attaches it iff P(f_a(bt) + b).
    AppendOutcome apply_append(const Blocktree &bt, const BlockContent &content, const SelectionFn &f_a,
                               const ValidityPredicate &valid, Tick created = 0);

    /// read(): returns f_r(bt); the tree is untouched.
    Chain read_tree(const Blocktree &bt, const SelectionFn &f_r);
}
