#pragma once

#include "btlab/checker.hpp"
#include "btlab/oracle.hpp"
#include "btlab/serialize.hpp"
#include "btlab/sim.hpp"

#include <string>
#include <vector>

namespace btlab
{
    /// A run description: network configuration plus protocol workload.
    ///
    ///   {"protocol": "ep-async" | "counterexample" | "streamlet",
    ///    "n", "byzantine": {"<pid>": tag}, "crash_at": {"<pid>": tick},
    ///    "gst", "delta", "horizon", "seed", "adversary",
    ///    "workload": {...}}
    ///
    /// Unknown keys are rejected.
    struct Scenario
    {
        std::string protocol = "ep-async";
        NetConfig net;
        EpWorkload ep;
        StreamletWorkload streamlet;
        std::vector<std::size_t> h_targets{3};
        std::size_t rounds = 5;
        std::size_t ec_instances = 20;
    };

    /// Throws ConfigError.
    Scenario scenario_from_json(const json &j);
    json scenario_to_json(const Scenario &s);
    Scenario load_scenario(const std::string &path);

    json net_config_to_json(const NetConfig &cfg);

    json verdict_to_json(const Verdict &v);
    json report_to_json(const Report &r);
    std::string report_table(const Report &r);

    void write_audit(std::ostream &out, const std::vector<AuditEntry> &audit);
    void write_deliveries(std::ostream &out, const std::vector<Delivery> &deliveries);
    json message_to_json(const StreamletMessage &m);
}
