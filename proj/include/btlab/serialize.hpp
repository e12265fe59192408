#pragma once

#include "btlab/block.hpp"
#include "btlab/chain.hpp"

#include <json.hpp>

#include <functional>

namespace btlab
{
    using json = nlohmann::json;

    /// {id, parent, creator, epoch, height, payload} with hex-encoded bytes.
    json block_to_json(const Block &b);
    /// Throws TraceFormatError on malformed input.
    BlockPtr block_from_json(const json &j);

    /// Array of block objects.
    json chain_to_json(const Chain &bc);
    Chain chain_from_json(const json &j);

    /// Array of id strings; resolve maps each id back to a block.
    json chain_ids_to_json(const Chain &bc);
    Chain chain_from_ids(const json &j, const std::function<BlockPtr(const BlockId &)> &resolve);
}
