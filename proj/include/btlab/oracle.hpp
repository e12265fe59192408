#pragma once

#include "btlab/blocktree.hpp"

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace btlab
{
    struct ViewSnapshot
    {
        Blocktree tree;
        std::uint64_t version = 0;
    };

    struct AuditEntry
    {
        std::string op; // update_view | get_valid_block | set_valid_block
        ProcessId process;
        Tick tick = 0;
        std::optional<BlockId> parent;
        std::optional<BlockId> block;
        std::uint64_t version = 0;
        std::string result;
    };

    /// Gatekeeper of the shared blocktree. Without a fork bound it behaves as
    /// Theta_P; with k set it behaves as Theta_{F,k}, where outstanding grants
    /// count toward the k children a parent may ever have.
    class Oracle
    {
    public:
        explicit Oracle(ValidityPredicate valid, std::optional<std::size_t> fork_bound = std::nullopt);

        std::optional<std::size_t> fork_bound() const noexcept { return k_; }

        /// Simulator clock; commits are stamped with it.
        void advance_to(Tick now);
        Tick now() const noexcept { return now_; }

        /// The newest global state committed strictly before tick as_of, never
        /// older than the caller's previous snapshot, plus the caller's own
        /// commits.
        ViewSnapshot update_view(ProcessId p, Tick as_of);
        ViewSnapshot update_view(ProcessId p) { return update_view(p, now_); }

        /// Approves candidate as a child of parent iff P(chain(parent) + candidate)
        /// holds and, under a fork bound, the parent has room. Throws UnknownParent
        /// when parent is not in the global tree and DuplicateBlock when candidate
        /// is already attached.
        bool get_valid_block(ProcessId p, const BlockId &parent, const BlockPtr &candidate);

        /// Attaches a granted block and returns the parent's child ids in attach
        /// order. Retrying an applied block leaves the tree unchanged. Throws
        /// UngrantedBlock for pairs that were never approved.
        std::vector<BlockId> set_valid_block(ProcessId p, const BlockId &parent, const BlockPtr &b);

        const Blocktree &global() const noexcept { return versions_.back().tree; }
        std::uint64_t version() const noexcept { return versions_.back().tree.version(); }
        const std::vector<AuditEntry> &audit() const noexcept { return audit_; }
        void set_audit_views(bool on) { audit_views_ = on; }

        /// Largest child count of any block in the global tree.
        std::size_t max_fork_width() const;

    private:
        struct Commit
        {
            Tick tick;
            Blocktree tree;
        };

        ValidityPredicate valid_;
        std::optional<std::size_t> k_;
        Tick now_ = 0;
        std::vector<Commit> versions_;
        struct OwnCommit
        {
            BlockPtr block;
            Tick tick;
            std::size_t version; // first version containing block
        };

        std::map<ProcessId, std::size_t> last_view_;
        std::map<ProcessId, std::vector<OwnCommit>> own_;
        std::unordered_map<BlockId, BlockId, BlockIdHash> grants_; // block -> parent
        std::unordered_map<BlockId, std::unordered_set<BlockId, BlockIdHash>, BlockIdHash> pending_;
        std::vector<AuditEntry> audit_;
        bool audit_views_ = false;
    };
}
