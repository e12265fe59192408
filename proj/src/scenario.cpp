#include "btlab/scenario.hpp"

#include "btlab/errors.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace btlab
{
    namespace
    {
        void reject_unknown(const json &j, const std::set<std::string> &known, const std::string &where)
        {
            for (const auto &[key, value] : j.items())
            {
                if (!known.count(key))
                    throw ConfigError("unknown key '" + key + "' in " + where);
            }
        }

        template <typename T>
        void read_opt(const json &j, const char *key, T &out)
        {
            if (j.contains(key))
                out = j.at(key).get<T>();
        }

        std::map<ProcessId, std::string> read_tags(const json &j)
        {
            std::map<ProcessId, std::string> out;
            for (const auto &[key, value] : j.items())
                out[ProcessId{static_cast<std::uint32_t>(std::stoul(key))}] = value.get<std::string>();
            return out;
        }

        std::map<ProcessId, Tick> read_ticks(const json &j)
        {
            std::map<ProcessId, Tick> out;
            for (const auto &[key, value] : j.items())
                out[ProcessId{static_cast<std::uint32_t>(std::stoul(key))}] = value.get<Tick>();
            return out;
        }
    }

    Scenario scenario_from_json(const json &j)
    {
        Scenario s;
        try
        {
            if (!j.is_object())
                throw ConfigError("scenario must be a JSON object");
            reject_unknown(j,
                           {"protocol", "n", "byzantine", "crash_at", "gst", "delta", "horizon", "seed", "adversary",
                            "workload"},
                           "scenario");
            read_opt(j, "protocol", s.protocol);
            if (s.protocol != "ep-async" && s.protocol != "counterexample" && s.protocol != "streamlet")
                throw ConfigError("unknown protocol " + s.protocol);
            read_opt(j, "n", s.net.n);
            if (j.contains("byzantine"))
                s.net.byzantine = read_tags(j.at("byzantine"));
            if (j.contains("crash_at"))
                s.net.crash_at = read_ticks(j.at("crash_at"));
            read_opt(j, "gst", s.net.gst);
            read_opt(j, "delta", s.net.delta);
            read_opt(j, "horizon", s.net.horizon);
            read_opt(j, "seed", s.net.seed);
            if (j.contains("adversary"))
            {
                auto a = adversary_from_string(j.at("adversary").get<std::string>());
                if (!a)
                    throw ConfigError("unknown adversary " + j.at("adversary").get<std::string>());
                s.net.adversary = *a;
            }
            if (j.contains("workload"))
            {
                const json &w = j.at("workload");
                reject_unknown(w,
                               {"append_every", "read_every", "attack_probability", "fork_width", "fork_depth",
                                "grind_attempts", "fork_bound", "two_thirds", "h_targets", "rounds", "ec_instances"},
                               "workload");
                read_opt(w, "append_every", s.ep.append_every);
                read_opt(w, "read_every", s.ep.read_every);
                s.streamlet.read_every = s.ep.read_every;
                read_opt(w, "attack_probability", s.ep.attack_probability);
                read_opt(w, "fork_width", s.ep.attack.fork_width);
                read_opt(w, "fork_depth", s.ep.attack.fork_depth);
                read_opt(w, "grind_attempts", s.ep.attack.grind_attempts);
                if (w.contains("fork_bound") && !w.at("fork_bound").is_null())
                    s.ep.fork_bound = w.at("fork_bound").get<std::size_t>();
                read_opt(w, "two_thirds", s.streamlet.two_thirds);
                read_opt(w, "h_targets", s.h_targets);
                read_opt(w, "rounds", s.rounds);
                read_opt(w, "ec_instances", s.ec_instances);
            }
        }
        catch (const json::exception &e)
        {
            throw ConfigError(std::string("scenario: ") + e.what());
        }
        catch (const std::logic_error &e)
        {
            // std::stoul on a non-numeric process id
            if (dynamic_cast<const ConfigError *>(&e))
                throw;
            throw ConfigError(std::string("scenario: ") + e.what());
        }
        s.net.validate();
        return s;
    }

    json net_config_to_json(const NetConfig &cfg)
    {
        json byz = json::object();
        for (const auto &[p, tag] : cfg.byzantine)
            byz[std::to_string(p.value)] = tag;
        json crash = json::object();
        for (const auto &[p, t] : cfg.crash_at)
            crash[std::to_string(p.value)] = t;
        return json{{"n", cfg.n},          {"byzantine", byz},   {"crash_at", crash},
                    {"gst", cfg.gst},      {"delta", cfg.delta}, {"horizon", cfg.horizon},
                    {"seed", cfg.seed},    {"adversary", to_string(cfg.adversary)}};
    }

    json scenario_to_json(const Scenario &s)
    {
        json j = net_config_to_json(s.net);
        j["protocol"] = s.protocol;
        json w{{"append_every", s.ep.append_every},
               {"read_every", s.protocol == "streamlet" ? s.streamlet.read_every : s.ep.read_every},
               {"attack_probability", s.ep.attack_probability},
               {"fork_width", s.ep.attack.fork_width},
               {"fork_depth", s.ep.attack.fork_depth},
               {"grind_attempts", s.ep.attack.grind_attempts},
               {"fork_bound", s.ep.fork_bound ? json(*s.ep.fork_bound) : json(nullptr)},
               {"two_thirds", s.streamlet.two_thirds},
               {"h_targets", s.h_targets},
               {"rounds", s.rounds},
               {"ec_instances", s.ec_instances}};
        j["workload"] = w;
        return j;
    }

    Scenario load_scenario(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open scenario " + path);
        try
        {
            return scenario_from_json(json::parse(in));
        }
        catch (const json::exception &e)
        {
            throw ConfigError(path + ": " + e.what());
        }
    }

    json verdict_to_json(const Verdict &v)
    {
        json j{{"criterion", to_string(v.criterion)}, {"verdict", to_string(v.status)}};
        if (v.witness)
        {
            json w{{"events", v.witness->events}};
            if (v.witness->position)
                w["position"] = *v.witness->position;
            if (!v.witness->note.empty())
                w["note"] = v.witness->note;
            j["witness"] = w;
        }
        else
        {
            j["witness"] = nullptr;
        }
        return j;
    }

    json report_to_json(const Report &r)
    {
        json verdicts = json::array();
        for (const auto &v : r.verdicts)
            verdicts.push_back(verdict_to_json(v));
        json churn = json::object();
        for (const auto &[pos, c] : r.metrics.churn)
            churn[std::to_string(pos)] = c;
        json series = json::array();
        for (const auto &[t, len] : r.metrics.common_prefix_series)
            series.push_back({t, len});
        json metrics{{"churn", churn},
                     {"max_displacement", r.metrics.max_displacement},
                     {"displacement_plateau", r.metrics.displacement_plateau},
                     {"common_prefix_series", series},
                     {"min_esp_cut", r.metrics.min_esp_cut ? json(*r.metrics.min_esp_cut) : json(nullptr)},
                     {"smallest_k_ec", r.metrics.smallest_k_ec ? json(*r.metrics.smallest_k_ec) : json(nullptr)}};
        json params{{"window", r.config.window}, {"cut_fraction", r.config.cut_fraction}, {"k", r.k_used}};
        if (r.config.horizon)
            params["horizon"] = *r.config.horizon;
        return json{{"verdicts", verdicts}, {"metrics", metrics}, {"parameters", params}};
    }

    std::string report_table(const Report &r)
    {
        std::ostringstream out;
        out << std::left << std::setw(24) << "criterion" << std::setw(14) << "verdict" << "witness\n";
        for (const auto &v : r.verdicts)
        {
            out << std::setw(24) << to_string(v.criterion) << std::setw(14) << to_string(v.status);
            if (v.witness)
            {
                out << "events";
                for (auto e : v.witness->events)
                    out << ' ' << e;
                if (v.witness->position)
                    out << " pos " << *v.witness->position;
                if (!v.witness->note.empty())
                    out << " (" << v.witness->note << ')';
            }
            out << '\n';
        }
        out << "max displacement " << r.metrics.max_displacement
            << (r.metrics.displacement_plateau ? " (plateau)" : " (growing)") << ", min ESP cut ";
        if (r.metrics.min_esp_cut)
            out << *r.metrics.min_esp_cut;
        else
            out << '-';
        out << ", k " << r.k_used << '\n';
        return out.str();
    }

    void write_audit(std::ostream &out, const std::vector<AuditEntry> &audit)
    {
        for (const auto &a : audit)
        {
            json j{{"op", a.op},
                   {"process", a.process.value},
                   {"tick", a.tick},
                   {"parent", a.parent ? json(a.parent->hex()) : json(nullptr)},
                   {"block", a.block ? json(a.block->hex()) : json(nullptr)},
                   {"version", a.version},
                   {"result", a.result}};
            out << j.dump() << '\n';
        }
    }

    void write_deliveries(std::ostream &out, const std::vector<Delivery> &deliveries)
    {
        for (const auto &d : deliveries)
        {
            json j{{"op", "deliver"},
                   {"from", d.from.value},
                   {"to", d.to.value},
                   {"sent", d.sent},
                   {"deliver_at", d.deliver_at},
                   {"correct_sender", d.correct_sender},
                   {"type", d.vote ? "vote" : "propose"}};
            out << j.dump() << '\n';
        }
    }

    json message_to_json(const StreamletMessage &m)
    {
        return json{{"type", m.kind == StreamletMessage::Kind::Vote ? "vote" : "propose"},
                    {"epoch", m.epoch},
                    {"block", block_to_json(*m.block)},
                    {"sender", m.sender.value},
                    {"signature-tag", "sig:" + std::to_string(m.sender.value) + ":" + m.block->id.short_hex()}};
    }
}
