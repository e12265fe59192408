#include "btlab/block.hpp"

#include <cstring>

namespace btlab
{
    namespace
    {
        constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

        std::uint64_t mix64(std::uint64_t z)
        {
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            return z ^ (z >> 31);
        }

        struct Lane
        {
            std::uint64_t state;

            void feed(std::uint8_t byte)
            {
                state ^= byte;
                state *= kFnvPrime;
            }

            void feed_u64(std::uint64_t v)
            {
                for (int i = 0; i < 8; ++i)
                {
                    feed(static_cast<std::uint8_t>(v >> (8 * i)));
                }
            }
        };

        int hex_value(char c)
        {
            if (c >= '0' && c <= '9')
                return c - '0';
            if (c >= 'a' && c <= 'f')
                return c - 'a' + 10;
            if (c >= 'A' && c <= 'F')
                return c - 'A' + 10;
            return -1;
        }
    }

    std::string to_hex(std::span<const std::uint8_t> bytes)
    {
        static constexpr char kDigits[] = "0123456789abcdef";
        std::string out;
        out.reserve(bytes.size() * 2);
        for (auto b : bytes)
        {
            out.push_back(kDigits[b >> 4]);
            out.push_back(kDigits[b & 0xf]);
        }
        return out;
    }

    std::optional<Bytes> bytes_from_hex(std::string_view hex)
    {
        if (hex.size() % 2 != 0)
            return std::nullopt;
        Bytes out(hex.size() / 2);
        for (std::size_t i = 0; i < out.size(); ++i)
        {
            int hi = hex_value(hex[2 * i]);
            int lo = hex_value(hex[2 * i + 1]);
            if (hi < 0 || lo < 0)
                return std::nullopt;
            out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
        }
        return out;
    }

    std::string BlockId::hex() const { return to_hex(bytes_); }

    std::optional<BlockId> BlockId::from_hex(std::string_view hex)
    {
        auto bytes = bytes_from_hex(hex);
        if (!bytes || bytes->size() != kSize)
            return std::nullopt;
        std::array<std::uint8_t, kSize> raw{};
        std::memcpy(raw.data(), bytes->data(), kSize);
        return BlockId(raw);
    }

    std::size_t BlockIdHash::operator()(const BlockId &id) const noexcept
    {
        std::uint64_t word = 0;
        std::memcpy(&word, id.bytes().data(), sizeof(word));
        return static_cast<std::size_t>(word);
    }

    BlockId block_digest(const BlockId &parent, ProcessId creator, std::uint64_t epoch,
                         std::span<const std::uint8_t> payload)
    {
        Lane lanes[2] = {{0xcbf29ce484222325ULL}, {0x84222325cbf29ce4ULL ^ 0x5bd1e995ULL}};
        for (auto &lane : lanes)
        {
            for (auto b : parent.bytes())
                lane.feed(b);
            lane.feed_u64(creator.value);
            lane.feed_u64(epoch);
            lane.feed_u64(payload.size());
            for (auto b : payload)
                lane.feed(b);
        }
        const std::uint64_t words[2] = {mix64(lanes[0].state), mix64(lanes[1].state ^ lanes[0].state)};
        std::array<std::uint8_t, BlockId::kSize> raw{};
        for (int w = 0; w < 2; ++w)
        {
            // Big-endian so hex strings and byte comparison agree.
            for (int i = 0; i < 8; ++i)
            {
                raw[w * 8 + i] = static_cast<std::uint8_t>(words[w] >> (56 - 8 * i));
            }
        }
        return BlockId(raw);
    }

    const BlockPtr &genesis_block()
    {
        static const BlockPtr genesis = [] {
            static constexpr std::uint8_t kTag[] = {'g', 'e', 'n', 'e', 's', 'i', 's'};
            Block b;
            b.id = block_digest(BlockId{}, kNoProcess, 0, kTag);
            b.parent = b.id;
            b.creator = kNoProcess;
            b.epoch = 0;
            b.height = 0;
            return std::make_shared<const Block>(std::move(b));
        }();
        return genesis;
    }

    BlockPtr make_block(const Block &parent, ProcessId creator, std::uint64_t epoch, Bytes payload)
    {
        Block b;
        b.id = block_digest(parent.id, creator, epoch, payload);
        b.parent = parent.id;
        b.creator = creator;
        b.epoch = epoch;
        b.payload = std::move(payload);
        b.height = parent.height + 1;
        return std::make_shared<const Block>(std::move(b));
    }

    Bytes u64_payload(std::uint64_t value)
    {
        Bytes out(8);
        for (int i = 0; i < 8; ++i)
            out[i] = static_cast<std::uint8_t>(value >> (8 * i));
        return out;
    }

    std::optional<std::uint64_t> payload_u64(std::span<const std::uint8_t> payload)
    {
        if (payload.size() < 8)
            return std::nullopt;
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(payload[i]) << (8 * i);
        return v;
    }
}
