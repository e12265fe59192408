#include "btlab/trace.hpp"

#include "btlab/errors.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace btlab
{
    namespace
    {
        class BlockDefiner
        {
        public:
            explicit BlockDefiner(std::ostream &out) : out_(out) { seen_.insert(genesis_block()->id); }

            void define(const Block &b)
            {
                if (!seen_.insert(b.id).second)
                    return;
                json line = block_to_json(b);
                line["type"] = "block";
                out_ << line.dump() << '\n';
            }

        private:
            std::ostream &out_;
            std::unordered_set<BlockId, BlockIdHash> seen_;
        };
    }

    void write_trace(std::ostream &out, const json &header, const History &h)
    {
        json head = header;
        head["type"] = "header";
        out << head.dump() << '\n';

        BlockDefiner blocks(out);
        for (const auto &e : h.events())
        {
            json line{{"type", "event"},
                      {"eid", e.eid},
                      {"process", e.process.value},
                      {"kind", to_string(e.kind)},
                      {"tick", e.tick}};
            switch (e.kind)
            {
            case EventKind::AppendInv:
                blocks.define(*e.block);
                line["block"] = e.block->id.hex();
                break;
            case EventKind::AppendRsp:
                line["ack"] = e.ack;
                break;
            case EventKind::ReadRsp:
                for (const auto &b : e.chain->blocks())
                    blocks.define(*b);
                line["chain"] = chain_ids_to_json(*e.chain);
                break;
            case EventKind::ReadInv:
                break;
            }
            out << line.dump() << '\n';
        }
    }

    std::string trace_to_string(const json &header, const History &h)
    {
        std::ostringstream out;
        write_trace(out, header, h);
        return out.str();
    }

    Trace read_trace(std::istream &in)
    {
        Trace trace;
        std::unordered_map<BlockId, BlockPtr, BlockIdHash> defined;
        defined.emplace(genesis_block()->id, genesis_block());
        auto resolve = [&](const BlockId &id) -> BlockPtr {
            auto it = defined.find(id);
            return it == defined.end() ? nullptr : it->second;
        };

        std::string text;
        std::size_t line_no = 0;
        bool have_header = false;
        while (std::getline(in, text))
        {
            ++line_no;
            if (text.empty())
                continue;
            json line;
            try
            {
                line = json::parse(text);
                const auto type = line.at("type").get<std::string>();
                if (type == "header")
                {
                    line.erase("type");
                    trace.header = std::move(line);
                    have_header = true;
                }
                else if (type == "block")
                {
                    auto b = block_from_json(line);
                    defined.emplace(b->id, b);
                }
                else if (type == "event")
                {
                    auto kind = event_kind_from_string(line.at("kind").get<std::string>());
                    if (!kind)
                        throw TraceFormatError("unknown event kind");
                    Event e;
                    e.process = ProcessId{line.at("process").get<std::uint32_t>()};
                    e.kind = *kind;
                    e.tick = line.at("tick").get<Tick>();
                    if (*kind == EventKind::AppendInv)
                    {
                        auto id = BlockId::from_hex(line.at("block").get<std::string>());
                        if (!id || !(e.block = resolve(*id)))
                            throw TraceFormatError("append of an undefined block");
                    }
                    else if (*kind == EventKind::AppendRsp)
                    {
                        e.ack = line.at("ack").get<bool>();
                    }
                    else if (*kind == EventKind::ReadRsp)
                    {
                        e.chain = chain_from_ids(line.at("chain"), resolve);
                    }
                    const auto eid = trace.history.record(std::move(e));
                    if (line.contains("eid") && line["eid"].get<std::uint64_t>() != eid)
                        throw TraceFormatError("non-sequential eid");
                }
                else
                {
                    throw TraceFormatError("unknown line type " + type);
                }
            }
            catch (const json::exception &ex)
            {
                throw TraceFormatError("line " + std::to_string(line_no) + ": " + ex.what());
            }
            catch (const TraceFormatError &ex)
            {
                throw TraceFormatError("line " + std::to_string(line_no) + ": " + ex.what());
            }
        }
        if (!have_header)
            throw TraceFormatError("missing header line");
        return trace;
    }

    Trace read_trace_file(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw TraceFormatError("cannot open " + path);
        return read_trace(in);
    }

    void write_trace_file(const std::string &path, const json &header, const History &h)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + path);
        write_trace(out, header, h);
    }
}
