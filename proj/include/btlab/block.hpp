#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace btlab
{
    using Tick = std::uint64_t;
    using Bytes = std::vector<std::uint8_t>;

    struct ProcessId
    {
        std::uint32_t value = 0;

        auto operator<=>(const ProcessId &) const = default;
    };

    // Creator recorded on the genesis block.
    inline constexpr ProcessId kNoProcess{std::numeric_limits<std::uint32_t>::max()};

    /// 128-bit block identifier. The total order used by selection functions and
    /// tie-breaks is the lexicographic order of the bytes.
    class BlockId
    {
    public:
        static constexpr std::size_t kSize = 16;

        BlockId() = default;
        explicit BlockId(const std::array<std::uint8_t, kSize> &bytes) : bytes_(bytes) {}

        const std::array<std::uint8_t, kSize> &bytes() const noexcept { return bytes_; }
        std::string hex() const;
        // Eight leading hex digits, for logs and test names.
        std::string short_hex() const { return hex().substr(0, 8); }

        static std::optional<BlockId> from_hex(std::string_view hex);

        auto operator<=>(const BlockId &) const = default;

    private:
        std::array<std::uint8_t, kSize> bytes_{};
    };

    struct BlockIdHash
    {
        std::size_t operator()(const BlockId &id) const noexcept;
    };

    struct Block
    {
        BlockId id;
        BlockId parent;
        ProcessId creator;
        std::uint64_t epoch = 0;
        Bytes payload;
        std::uint64_t height = 0;

        bool is_genesis() const noexcept { return id == parent; }
    };

    using BlockPtr = std::shared_ptr<const Block>;

    /// Seeded digest over (parent, creator, epoch, payload). Not cryptographic.
    BlockId block_digest(const BlockId &parent, ProcessId creator, std::uint64_t epoch,
                         std::span<const std::uint8_t> payload);

    /// The unique root shared by every tree in the process.
    const BlockPtr &genesis_block();

    BlockPtr make_block(const Block &parent, ProcessId creator, std::uint64_t epoch, Bytes payload);

    std::string to_hex(std::span<const std::uint8_t> bytes);
    std::optional<Bytes> bytes_from_hex(std::string_view hex);

    // Helpers for the integer payloads used by scenarios and tests.
    Bytes u64_payload(std::uint64_t value);
    std::optional<std::uint64_t> payload_u64(std::span<const std::uint8_t> payload);
}

template <>
struct std::hash<btlab::BlockId>
{
    std::size_t operator()(const btlab::BlockId &id) const noexcept { return btlab::BlockIdHash{}(id); }
};
