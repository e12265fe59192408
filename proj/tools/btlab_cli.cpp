#include "btlab/checker.hpp"
#include "btlab/counterexample.hpp"
#include "btlab/errors.hpp"
#include "btlab/reductions.hpp"
#include "btlab/scenario.hpp"
#include "btlab/sim.hpp"
#include "btlab/trace.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace btlab;

namespace
{
    struct RunOptions
    {
        std::string scenario_path;
        std::string trace_path = "trace.jsonl";
        std::string audit_path;
        std::optional<std::size_t> prune_dis;
        bool prune_half = false;
        bool ec = false;
        std::optional<std::uint64_t> seed;
        std::optional<Tick> horizon;
        std::optional<std::size_t> n;
    };

    void add_run_options(CLI::App *cmd, RunOptions &o, bool network)
    {
        cmd->add_option("--scenario", o.scenario_path, "Scenario JSON file")->check(CLI::ExistingFile);
        cmd->add_option("--trace", o.trace_path, "Output trace (JSON lines)")->capture_default_str();
        cmd->add_option("--audit", o.audit_path, "Output audit log (JSON lines)");
        cmd->add_option("--seed", o.seed, "Override the scenario seed");
        auto *dis = cmd->add_option("--prune-dis", o.prune_dis, "Record reads pruned by N trailing blocks");
        auto *half = cmd->add_flag("--prune-half", o.prune_half, "Record reads pruned to their first half");
        dis->excludes(half);
        if (network)
        {
            cmd->add_option("--horizon", o.horizon, "Override the scenario horizon");
            cmd->add_option("--n", o.n, "Override the process count");
        }
    }

    Scenario scenario_for(const RunOptions &o, const std::string &protocol)
    {
        Scenario s;
        if (!o.scenario_path.empty())
            s = load_scenario(o.scenario_path);
        else if (protocol == "streamlet")
        {
            s.net.n = 4;
            s.net.horizon = 3000;
            s.net.gst = 500;
            s.net.adversary = Adversary::TargetedRace;
        }
        s.protocol = protocol;
        if (o.seed)
            s.net.seed = *o.seed;
        if (o.horizon)
            s.net.horizon = *o.horizon;
        if (o.n)
            s.net.n = *o.n;
        s.net.validate();
        return s;
    }

    json header_for(const Scenario &s, const std::vector<ProcessId> &correct, const RunOptions &o)
    {
        json h{{"protocol", s.protocol}, {"config", scenario_to_json(s)}, {"seed", s.net.seed}};
        json ids = json::array();
        for (auto p : correct)
            ids.push_back(p.value);
        h["correct"] = ids;
        if (o.prune_dis)
            h["reduction"] = {{"mode", "known-dis"}, {"dis", *o.prune_dis}};
        else if (o.prune_half)
            h["reduction"] = {{"mode", "half"}};
        return h;
    }

    const History &maybe_pruned(const History &h, const RunOptions &o, History &storage)
    {
        if (o.prune_dis)
            storage = prune_reads(h, KnownDis{*o.prune_dis});
        else if (o.prune_half)
            storage = prune_reads(h, Half{});
        else
            return h;
        return storage;
    }

    std::ofstream open_out(const std::string &path)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + path);
        return out;
    }

    void emit(const Scenario &s, const History &h, const std::vector<ProcessId> &correct, const RunOptions &o)
    {
        History pruned;
        write_trace_file(o.trace_path, header_for(s, correct, o), maybe_pruned(h, o, pruned));
        std::cout << "trace: " << o.trace_path << '\n';
    }

    int run_ep_cmd(const RunOptions &o)
    {
        const Scenario s = scenario_for(o, "ep-async");
        auto run = run_ep(s.net, s.ep);
        emit(s, run.history, run.correct, o);
        if (!o.audit_path.empty())
        {
            auto out = open_out(o.audit_path);
            write_audit(out, run.audit);
            std::cout << "audit: " << o.audit_path << '\n';
        }
        std::cout << "tree blocks " << run.tree.size() << ", correct successful appends "
                  << run.correct_successful_appends << ", widest fork " << run.max_fork_width << '\n';
        return 0;
    }

    int run_counterexample_cmd(const RunOptions &o, std::optional<std::size_t> rounds,
                               const std::vector<std::size_t> &h_targets)
    {
        Scenario s = scenario_for(o, "counterexample");
        if (rounds)
            s.rounds = *rounds;
        if (!h_targets.empty())
            s.h_targets = h_targets;
        auto run = run_counterexample(s.h_targets, s.rounds, s.net.seed);
        emit(s, run.history, {run.p1, run.p2, run.observer}, o);
        if (!o.audit_path.empty())
        {
            auto out = open_out(o.audit_path);
            write_audit(out, run.audit);
            std::cout << "audit: " << o.audit_path << '\n';
        }
        for (const auto &lc : run.lead_changes)
        {
            std::cout << "lead change " << lc.round << " at tick " << lc.tick << ": p" << lc.leader.value << ' '
                      << lc.leader_before << " -> " << lc.leader_after << " over " << lc.other << '\n';
        }
        return 0;
    }

    int run_streamlet_cmd(const RunOptions &o)
    {
        const Scenario s = scenario_for(o, "streamlet");
        StreamletRun run;
        if (o.ec)
        {
            auto ec = run_ec(s.net, s.streamlet, s.ec_instances);
            std::cout << "ec: " << ec.decisions.size() << " decisions over " << ec.instances
                      << " instances, integrity " << (ec.integrity ? "ok" : "violated") << ", validity "
                      << (ec.validity ? "ok" : "violated") << ", smallest k ";
            if (ec.smallest_k)
                std::cout << *ec.smallest_k << '\n';
            else
                std::cout << "undefined (some instance undecided)\n";
            run = std::move(ec.base);
        }
        else
        {
            run = run_streamlet(s.net, s.streamlet);
        }
        emit(s, run.history, s.net.correct_processes(), o);
        if (!o.audit_path.empty())
        {
            auto out = open_out(o.audit_path);
            write_deliveries(out, run.deliveries);
            std::cout << "audit: " << o.audit_path << '\n';
        }
        std::size_t conflicts = 0;
        for (const auto &[p, c] : run.conflict_events)
            conflicts = std::max(conflicts, c);
        std::cout << "conflict events " << conflicts << ", delta violations " << run.delta_violations << '\n';
        for (const auto &[p, events] : run.detections)
        {
            for (const auto &d : events)
            {
                std::cout << "p" << p.value << " excluded at tick " << d.tick << ':';
                for (auto q : d.flagged)
                    std::cout << " p" << q.value;
                std::cout << '\n';
            }
        }
        return 0;
    }

    int check_cmd(const std::string &trace_path, double window, double cut, std::optional<std::size_t> k,
                  bool k_sweep, const std::string &json_path)
    {
        const Trace trace = read_trace_file(trace_path);
        CheckConfig cfg;
        cfg.window = window;
        cfg.cut_fraction = cut;
        const json &header = trace.header;
        if (header.contains("config") && header["config"].contains("horizon") &&
            header.value("protocol", "") != "counterexample")
            cfg.horizon = std::min(header["config"]["horizon"].get<Tick>(), trace.history.last_tick());

        std::size_t appends = trace.history.successful_appends();
        if (header.contains("correct"))
        {
            std::vector<ProcessId> correct;
            for (const auto &p : header["correct"])
                correct.push_back(ProcessId{p.get<std::uint32_t>()});
            appends = trace.history.successful_appends(&correct);
        }
        cfg.k = k.value_or(appends / 2);

        const Report rep = run_all(trace.history, cfg);
        json out = report_to_json(rep);
        std::cout << report_table(rep);

        if (k_sweep)
        {
            json sweep = json::array();
            const std::size_t top = appends / 2;
            const std::size_t step = std::max<std::size_t>(1, top / 10);
            std::cout << "k sweep:";
            for (std::size_t kk = 0;; kk += step)
            {
                kk = std::min(kk, top);
                const auto v = check_ever_growing_tree(trace.history, kk);
                sweep.push_back({{"k", kk}, {"verdict", to_string(v.status)}});
                std::cout << ' ' << kk << '=' << to_string(v.status);
                if (kk == top)
                    break;
            }
            std::cout << '\n';
            out["k_sweep"] = sweep;
        }
        if (!json_path.empty())
        {
            auto f = open_out(json_path);
            f << out.dump(2) << '\n';
        }
        return 0;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Blocktree finality laboratory"};
    app.require_subcommand(1);

    RunOptions ep_opts, cx_opts, st_opts;
    auto *ep = app.add_subcommand("run-ep", "Run the ep-async protocol over the oracle");
    add_run_options(ep, ep_opts, true);

    auto *cx = app.add_subcommand("run-counterexample", "Replay the longest-chain race");
    add_run_options(cx, cx_opts, false);
    std::optional<std::size_t> rounds;
    std::vector<std::size_t> h_targets;
    cx->add_option("--rounds", rounds, "Number of lead changes");
    cx->add_option("--h-targets", h_targets, "Blocks appended per phase (cycled)");

    auto *st = app.add_subcommand("run-streamlet", "Run modified Streamlet over the simulated network");
    add_run_options(st, st_opts, true);
    st->add_flag("--ec", st_opts.ec, "Drive sequential Eventual Consensus instances through the run");

    auto *check = app.add_subcommand("check", "Check a trace against every consistency criterion");
    std::string trace_path, json_path;
    double window = 0.5, cut = 0.5;
    std::optional<std::size_t> k;
    bool k_sweep = false;
    check->add_option("trace", trace_path, "Trace file")->required()->check(CLI::ExistingFile);
    check->add_option("--window", window, "Eventual prefix window in (0, 1)")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    check->add_option("--cut-fraction", cut, "Eventual strong prefix cut fraction")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    check->add_option("--k", k, "Ever-growing-tree threshold (default: half the correct successful appends)");
    check->add_flag("--k-sweep", k_sweep, "Sweep the ever-growing-tree threshold up to its default");
    check->add_option("--json", json_path, "Write the JSON report here");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*ep)
            return run_ep_cmd(ep_opts);
        if (*cx)
            return run_counterexample_cmd(cx_opts, rounds, h_targets);
        if (*st)
            return run_streamlet_cmd(st_opts);
        if (*check)
        {
            if (window <= 0.0 || window >= 1.0)
                throw ConfigError("--window must lie strictly between 0 and 1");
            return check_cmd(trace_path, window, cut, k, k_sweep, json_path);
        }
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
