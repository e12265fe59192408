#pragma once

#include "btlab/blocktree.hpp"
#include "btlab/history.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace btlab
{
    enum class Criterion
    {
        ChainValidity,
        ChainIntegrity,
        EventualPrefix,
        EverGrowingTree,
        StrongPrefix,
        EventualStrongPrefix,
        BoundedDisplacement,
    };

    enum class Status
    {
        Pass,
        Fail,
        Inconclusive,
        Measured,
    };

    const char *to_string(Criterion c);
    const char *to_string(Status s);

    struct Witness
    {
        std::vector<std::uint64_t> events; // eids
        std::optional<std::size_t> position;
        std::string note;
    };

    struct Verdict
    {
        Criterion criterion{};
        Status status = Status::Inconclusive;
        std::optional<Witness> witness;

        bool pass() const noexcept { return status == Status::Pass; }
    };

    struct Metrics
    {
        // position -> largest number of value changes seen by one reader
        std::map<std::size_t, std::size_t> churn;
        std::size_t max_displacement = 0;
        bool displacement_plateau = true;
        std::vector<std::pair<Tick, std::size_t>> common_prefix_series;
        std::optional<std::size_t> min_esp_cut;
        std::optional<std::size_t> smallest_k_ec;
    };

    Verdict check_chain_validity(const History &h, const ValidityPredicate &valid);
    Verdict check_chain_integrity(const History &h);

    /// Finite approximation over horizon T: positions filled by reads before
    /// window*T must agree across every read at or after (1 - (1 - window)/2)*T.
    /// Reads too short to reach a position are not compared there. Fewer than two reads, or no reads in
    /// the late region, is inconclusive.
    Verdict check_eventual_prefix(const History &h, double window, std::optional<Tick> horizon = std::nullopt);
    Verdict check_ever_growing_tree(const History &h, std::size_t k);
    Verdict check_strong_prefix(const History &h);

    /// Smallest read index c (eid order) from which all read pairs are
    /// prefix-comparable. Undefined with fewer than two reads.
    std::optional<std::size_t> min_esp_cut(const History &h);
    /// Pass iff min_esp_cut <= cut_fraction * (number of reads).
    Verdict check_eventual_strong_prefix(const History &h, double cut_fraction);

    struct DisplacementReport
    {
        std::size_t max = 0;
        std::size_t first_half_max = 0;
        bool plateau = true;
        std::optional<std::pair<std::uint64_t, std::uint64_t>> argmax; // eids
    };

    /// Max over read pairs r before r' (eid order) of displacement(r, r').
    DisplacementReport measure_displacement(const History &h);
    Verdict bounded_displacement_verdict(const DisplacementReport &d);

    /// Per reader, counts positions whose value changes between consecutive
    /// reads (a fill from undefined is not a change); reports the max per position.
    std::map<std::size_t, std::size_t> churn(const History &h);
    std::vector<std::pair<Tick, std::size_t>> common_prefix_series(const History &h);

    struct CheckConfig
    {
        double window = 0.5;
        double cut_fraction = 0.5;
        // Defaults to half of the successful append count.
        std::optional<std::size_t> k;
        std::optional<Tick> horizon;
        ValidityPredicate validity;
    };

    struct Report
    {
        std::vector<Verdict> verdicts;
        Metrics metrics;
        CheckConfig config;
        std::size_t k_used = 0;

        const Verdict &verdict(Criterion c) const;
    };

    Report run_all(const History &h, CheckConfig cfg);

    /// Strong prefix pass implies ESP pass implies EP pass. Returns false on a
    /// violation of that ordering.
    bool lattice_consistent(const Report &r);
}
