#pragma once

#include "btlab/history.hpp"
#include "btlab/serialize.hpp"

#include <iosfwd>
#include <string>

namespace btlab
{
    struct Trace
    {
        json header;
        History history;
    };

    /// JSON lines: a header, then events in eid order. Each block is defined by a
    /// {"type":"block"} line before its first reference; chains and append
    /// invocations refer to blocks by id.
    void write_trace(std::ostream &out, const json &header, const History &h);
    std::string trace_to_string(const json &header, const History &h);

    /// Throws TraceFormatError for malformed lines and HistoryError when the
    /// events do not form a well-formed history.
    Trace read_trace(std::istream &in);
    Trace read_trace_file(const std::string &path);
    void write_trace_file(const std::string &path, const json &header, const History &h);
}
