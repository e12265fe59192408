#pragma once

#include <stdexcept>
#include <string>

namespace btlab
{
    // Caller bugs (duplicate ids, ungranted writes, malformed histories) are
    // reported as exceptions. Ordinary protocol outcomes (an append rejected by
    // the validity predicate) are plain return values.

    class DuplicateBlock : public std::logic_error
    {
    public:
        explicit DuplicateBlock(const std::string &id) : std::logic_error("duplicate block id " + id) {}
    };

    class UnknownParent : public std::runtime_error
    {
    public:
        explicit UnknownParent(const std::string &id) : std::runtime_error("unknown parent block " + id) {}
    };

    class UngrantedBlock : public std::logic_error
    {
    public:
        explicit UngrantedBlock(const std::string &id)
            : std::logic_error("set_valid_block without a grant for " + id)
        {
        }
    };

    class HistoryError : public std::logic_error
    {
    public:
        using std::logic_error::logic_error;
    };

    class ConfigError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    class TraceFormatError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };
}
