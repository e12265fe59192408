#include "btlab/serialize.hpp"

#include "btlab/errors.hpp"

namespace btlab
{
    json block_to_json(const Block &b)
    {
        return json{{"id", b.id.hex()},
                    {"parent", b.parent.hex()},
                    {"creator", b.creator.value},
                    {"epoch", b.epoch},
                    {"height", b.height},
                    {"payload", to_hex(b.payload)}};
    }

    BlockPtr block_from_json(const json &j)
    {
        try
        {
            auto id = BlockId::from_hex(j.at("id").get<std::string>());
            auto parent = BlockId::from_hex(j.at("parent").get<std::string>());
            auto payload = bytes_from_hex(j.at("payload").get<std::string>());
            if (!id || !parent || !payload)
                throw TraceFormatError("block: bad hex field");
            Block b;
            b.id = *id;
            b.parent = *parent;
            b.creator = ProcessId{j.at("creator").get<std::uint32_t>()};
            b.epoch = j.at("epoch").get<std::uint64_t>();
            b.height = j.at("height").get<std::uint64_t>();
            b.payload = std::move(*payload);
            if (b.is_genesis() && b.id == genesis_block()->id)
                return genesis_block();
            return std::make_shared<const Block>(std::move(b));
        }
        catch (const json::exception &e)
        {
            throw TraceFormatError(std::string("block: ") + e.what());
        }
    }

    json chain_to_json(const Chain &bc)
    {
        json out = json::array();
        for (const auto &b : bc.blocks())
            out.push_back(block_to_json(*b));
        return out;
    }

    Chain chain_from_json(const json &j)
    {
        if (!j.is_array())
            throw TraceFormatError("chain: expected array");
        std::vector<BlockPtr> blocks;
        for (const auto &item : j)
            blocks.push_back(block_from_json(item));
        return Chain(std::move(blocks));
    }

    json chain_ids_to_json(const Chain &bc)
    {
        json out = json::array();
        for (const auto &b : bc.blocks())
            out.push_back(b->id.hex());
        return out;
    }

    Chain chain_from_ids(const json &j, const std::function<BlockPtr(const BlockId &)> &resolve)
    {
        if (!j.is_array())
            throw TraceFormatError("chain: expected array of ids");
        std::vector<BlockPtr> blocks;
        blocks.reserve(j.size());
        for (const auto &item : j)
        {
            auto id = BlockId::from_hex(item.get<std::string>());
            if (!id)
                throw TraceFormatError("chain: bad id");
            auto b = resolve(*id);
            if (!b)
                throw TraceFormatError("chain: undefined block " + id->hex());
            blocks.push_back(std::move(b));
        }
        return Chain(std::move(blocks));
    }
}
